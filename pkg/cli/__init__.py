"""Command-line entry points for the POVM probability-domain toolkit"""
