import ipaddress
import re

import dns.reversename

from app.core.exceptions import MalformedName

# Underscore is not a hostname character but real MX data carries it.
_LABEL_RE = re.compile(r'^[a-z0-9_-]+$')

MAX_NAME_OCTETS = 253
MAX_LABEL_OCTETS = 63

ROOT = "."

# RFC 2181: TTLs are 31-bit; a value with the top bit set counts as zero
MAX_TTL = 2 ** 31 - 1


def canonicalize(raw: str) -> str:
    """
    Canonicalize a domain name: lowercase, single trailing dot stripped.

    Example:
    "MX.Domain.TLD." -> "mx.domain.tld"

    Raises:
        MalformedName: for empty labels, over-length labels or names, and
            characters outside letters, digits, hyphen and underscore
    """
    if not isinstance(raw, str) or not raw.strip():
        raise MalformedName("Domain name cannot be empty")

    name = raw.strip()

    # Internationalized names are stored in their A-label form
    if not name.isascii():
        try:
            name = name.encode("idna").decode("ascii")
        except UnicodeError as e:
            raise MalformedName(f"Cannot encode '{raw}' as IDNA: {e}") from e

    name = name.lower()
    if name.endswith("."):
        name = name[:-1]

    if not name:
        raise MalformedName(f"'{raw}' has no labels")
    if len(name) > MAX_NAME_OCTETS:
        raise MalformedName(f"'{raw}' exceeds {MAX_NAME_OCTETS} octets")

    for label in name.split("."):
        if not label:
            raise MalformedName(f"'{raw}' contains an empty label")
        if len(label) > MAX_LABEL_OCTETS:
            raise MalformedName(f"'{raw}' has a label over {MAX_LABEL_OCTETS} octets")
        if not _LABEL_RE.match(label):
            raise MalformedName(f"'{raw}' contains non-hostname characters")

    return name


def normalize_ttl(ttl: int) -> int:
    """Map a TTL above 2^31 - 1 to 0."""
    return 0 if ttl > MAX_TTL else ttl


def is_strict_hostname(name: str) -> bool:
    """True when a canonical name uses only RFC 952/1123 hostname characters."""
    return "_" not in name


def canonical_address(raw: str) -> str:
    """
    Canonical text form of an IP address.

    Dotted quad for IPv4, RFC 5952 lowercase compressed form for IPv6.

    Raises:
        ValueError: if raw is not an IP address
    """
    return ipaddress.ip_address(raw.strip()).compressed


def reverse_name(address: str) -> str:
    """Reverse lookup name (in-addr.arpa / ip6.arpa) without the trailing dot."""
    return dns.reversename.from_address(address).to_text(omit_final_dot=True).lower()


def matches_suffix(name: str, suffix: str) -> bool:
    """Whole-label suffix match: name equals suffix or ends with '.' + suffix."""
    return name == suffix or name.endswith("." + suffix)
