"""Bundled device descriptions, schemas and reference tables"""
