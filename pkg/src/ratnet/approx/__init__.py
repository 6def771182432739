"""
Scalar rational approximation: rational functions, elliptic functions,
Zolotarev sign approximants and the classic ReLU baselines.
"""
