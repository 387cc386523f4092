"""Tests for FGLSS Lab."""
