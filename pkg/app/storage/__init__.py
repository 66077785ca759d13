"""Map tables and run artifacts on disk"""
