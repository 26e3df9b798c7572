"""Packaged data files (canonical garment geometry)."""
