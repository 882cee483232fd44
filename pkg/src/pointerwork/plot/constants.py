PALETTE = [
    "#009ADE",
    "#FF1F5B",
    "#00CD6C",
    "#AF58BA",
    "#FFC61E",
    "#F28522",
    "#A0B1BA",
    "#191919",
]

# fixed colours for quantities that recur across figures
QUANTITY_COLORS = {
    "measured": "#009ADE",
    "predicted": "#191919",
    "r_d": "#FF1F5B",
    "r_e": "#00CD6C",
    "instantaneous": "#AF58BA",
    "bare": "#A0B1BA",
    "coherent": "#F28522",
}

SVG_HASH_SALT = "pointerwork"
