"""
Configuration, input validation and result output.
"""
