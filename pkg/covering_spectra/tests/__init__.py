"""Tests for covering-spectra."""
