"""
mx-audit

Measures how domains spread incoming mail across mail exchangers: MX, A,
AAAA, PTR and TXT resolution, configuration classification, corpus
statistics and an MTA selection simulator.
"""

__version__ = "1.0.0"
__author__ = "Development Team"
