"""Tests 모듈"""
