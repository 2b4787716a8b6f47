"""Utility functions for the POVM probability-domain toolkit"""
