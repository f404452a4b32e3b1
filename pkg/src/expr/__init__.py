"""Expr 엔진 모듈"""
