"""
Pydantic schemas for architectures, run configuration, reports and model files
"""
