"""Exact construction and certification of tight full-correlation Bell inequalities."""
