"""Symbol 모듈"""
