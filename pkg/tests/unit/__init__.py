"""Unit tests for the sporadic_rnn modules."""
