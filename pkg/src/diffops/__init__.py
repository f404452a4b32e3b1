"""미분연산자 모듈"""
