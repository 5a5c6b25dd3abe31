"""Tests for the sporadic_rnn package."""
