"""
Tests for sentgraph
Unit tests per module, CLI tests and slow acceptance runs on synthetic networks
"""
