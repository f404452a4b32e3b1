"""Quantize 모듈"""
