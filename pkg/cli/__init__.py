"""
Command-line interface: gen-data, train, eval, cross-analysis, compare.
"""
