"""실험 실행 모듈"""
