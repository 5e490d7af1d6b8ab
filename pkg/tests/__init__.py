"""Tests for fusionhar."""
