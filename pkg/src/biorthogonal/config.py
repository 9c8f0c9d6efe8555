def biorthogonalDefaults():
    return {
        "jmax": 30,
        "residual_limit": 1e-10,
        "cross_check_warn": 1e-20,
    }


def innerProductRuleDefaults():
    # Graded Gauss-Legendre panels in t = log(1+x)
    return {
        "scheme": "gauss_legendre_panels",
        "panel_count": 32,
        "points_per_panel": 24,
        "abs_tol": 1e-30,
        "rel_tol": 1e-28,
    }


def integralOracleRuleDefaults():
    # Small tensor-product rules evaluated in hardware doubles
    return {
        "scheme": "gauss_legendre_panels",
        "panel_count": 12,
        "points_per_panel": 16,
        "abs_tol": 1e-12,
        "rel_tol": 1e-10,
    }
