"""Integration tests: end-to-end runs, gradient verification and replications."""
