"""파라메트릭스 모듈"""
