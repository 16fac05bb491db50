"""Test package for the long-tail re-ranking experiments"""
