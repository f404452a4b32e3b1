"""위상공간 변수 정의

모든 심볼, 계수, 파라메트릭스 항은 아래 sympy 심볼 위의 식으로 표현된다.
"""

import sympy as sp

r = sp.Symbol("r", real=True)
theta = sp.Symbol("theta", real=True)
rho = sp.Symbol("rho", real=True)
eta = sp.Symbol("eta", real=True)
hbar = sp.Symbol("hbar", positive=True)
z = sp.Symbol("z")

# 바이심볼의 두 번째 공간 인자 (r′, θ′)
r_p = sp.Symbol("r_p", real=True)
theta_p = sp.Symbol("theta_p", real=True)

SPACE_VARIABLES = (r, theta)
MOMENTUM_VARIABLES = (rho, eta)
PRIMED_VARIABLES = (r_p, theta_p)
DIFF_VARIABLES = (r, theta, rho, eta, r_p, theta_p)
ALL_VARIABLES = (r, theta, rho, eta, hbar, z, r_p, theta_p)

_ALIASES = {"θ": "theta", "ρ": "rho", "η": "eta", "ħ": "hbar", "r′": "r_p", "θ′": "theta_p"}
BY_NAME: dict[str, sp.Symbol] = {s.name: s for s in ALL_VARIABLES}


def resolve(name: str | sp.Symbol) -> sp.Symbol:
    """이름(또는 유니코드 별칭)으로 변수 심볼 조회"""
    if isinstance(name, sp.Symbol):
        if name.name in BY_NAME:
            return BY_NAME[name.name]
        raise KeyError(name.name)
    return BY_NAME[_ALIASES.get(name, name)]
