"""Noisy subset selection under a cardinality constraint."""
