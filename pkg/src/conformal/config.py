def curveDefaults():
    return {
        "nodes": 512,
        "min_nodes": 64,
        "radius_tol": 1e-13,
        "bracket_expansions": 60,
        # Im J(node) relative to the image scale
        "image_tol": 1e-10,
    }


def contourDefaults():
    return {
        "panels": 16,
        "points_per_panel": 20,
        "tol": 1e-12,
        "max_doublings": 3,
        # Geometric refinement toward s = -1 on hard-edge curves
        "grading_levels": 20,
    }


def inversionDefaults():
    return {
        "newton_tol": 1e-13,
        "image_tol": 1e-12,
        "cut_distance": 1e-14,
    }
