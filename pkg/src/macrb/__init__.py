"""CRB analysis and robust placement of movable-antenna arrays for AoD estimation."""
