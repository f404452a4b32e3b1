"""endcalc - 끝을 가진 다양체 ℝ×S¹ 위의 준고전 유사미분 계산"""

__version__ = "0.1.0"
