"""Numerical toolkit for universal Teichmüller space"""

__version__ = "1.0.0"
