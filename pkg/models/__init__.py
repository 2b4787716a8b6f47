"""Numerical core: matrix kernel, states, POVMs, probability domain and estimation"""
