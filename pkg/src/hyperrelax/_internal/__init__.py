"""Internal helpers for hyperrelax."""
