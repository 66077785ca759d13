"""Pydantic models for maps, fields, differentials, grids and reports"""
