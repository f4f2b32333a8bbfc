"""
Scalar-on-function models: FDNN, FBNN and the FLM, FNN and MLP baselines
"""
