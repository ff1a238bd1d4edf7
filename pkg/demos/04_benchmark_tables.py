"""
Hierarchical benchmark scoring
==============================

Caption cells roll up with fixed weights: 0.4 systemic (long 0.8 /
short 0.2), 0.4 content-specific (speech 0.6 / music 0.3 / sound 0.1,
each the mean of its pure and mixed cells), 0.2 environment. QA is a
plain mean of six cells. All on a 0-100 scale.
"""

from dateval import CAPTION_CELLS, QA_CELLS, score_caption, score_qa

caption_rows = {
    "system-a": (43.5, 46.8, 27.2, 29.5, 29.3, 13.1, 42.8, 14.6, 7.1),
    "system-b": (56.4, 55.2, 42.5, 41.3, 46.6, 29.7, 52.9, 23.9, 19.4),
    "system-c": (61.1, 56.5, 39.9, 40.9, 32.1, 30.9, 50.7, 23.8, 17.9),
}

print("caption rollup")
for name, cells in caption_rows.items():
    breakdown = score_caption(dict(zip(CAPTION_CELLS, cells)))
    print(
        f"  {name}: systemic={breakdown.s_systemic:.2f} "
        f"content={breakdown.s_content_specific:.2f} "
        f"env={breakdown.s_env:.1f} -> {breakdown.score_cap:.2f}"
    )

qa_rows = {
    "system-a": (45.6, 39.2, 18.7, 34.6, 48.9, 41.2),
    "system-c": (57.8, 52.9, 39.1, 44.0, 53.2, 50.8),
}

print("qa rollup")
for name, cells in qa_rows.items():
    print(f"  {name}: -> {score_qa(dict(zip(QA_CELLS, cells))).score_qa:.2f}")

# weights close at every level, so a constant input passes through
# exactly (the internal arithmetic is exact rationals, not floats)
flat = score_caption({key: 37.3 for key in CAPTION_CELLS})
assert flat.score_cap == 37.3
print("constant 37.3 in, out:", flat.score_cap)
