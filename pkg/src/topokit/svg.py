"""Static SVG 1.1 plots written by hand so the bytes are fully deterministic."""
import math
from pathlib import Path

W, H, M = 420, 420, 50  # canvas width, height, margin
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _f(x):
    return f"{x:.3f}"


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class _Canvas:
    def __init__(self, xlim, ylim, title):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">',
            f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
            f'<rect x="{M}" y="{M}" width="{W - 2 * M}" height="{H - 2 * M}" fill="none" '
            'stroke="black"/>',
            f'<text x="{W / 2:.0f}" y="{M / 2:.0f}" text-anchor="middle" font-size="14">'
            f'{_esc(title)}</text>',
        ]

    def px(self, x):
        span = self.x1 - self.x0 or 1.0
        return M + (x - self.x0) / span * (W - 2 * M)

    def py(self, y):
        span = self.y1 - self.y0 or 1.0
        return H - M - (y - self.y0) / span * (H - 2 * M)

    def line(self, xa, ya, xb, yb, color="black", dash=False):
        extra = ' stroke-dasharray="4,3"' if dash else ""
        self.parts.append(f'<line x1="{_f(self.px(xa))}" y1="{_f(self.py(ya))}" '
                          f'x2="{_f(self.px(xb))}" y2="{_f(self.py(yb))}" stroke="{color}"{extra}/>')

    def circle(self, x, y, color):
        self.parts.append(f'<circle cx="{_f(self.px(x))}" cy="{_f(self.py(y))}" r="3" '
                          f'fill="{color}"/>')

    def polyline(self, xs, ys, color):
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}"/>')

    def text(self, x, y, s, anchor="start", size=11):
        self.parts.append(f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}" '
                          f'font-size="{size}">{_esc(s)}</text>')

    def ticks(self, xlabel, ylabel):
        self.text(M, H - M + 16, f"{self.x0:.4g}", "middle")
        self.text(W - M, H - M + 16, f"{self.x1:.4g}", "middle")
        self.text(M - 4, H - M, f"{self.y0:.4g}", "end")
        self.text(M - 4, M + 4, f"{self.y1:.4g}", "end")
        self.text(W / 2, H - 12, xlabel, "middle")
        self.text(14, H / 2, ylabel, "middle")

    def legend(self, labels):
        for i, (label, color) in enumerate(labels):
            y = M + 16 + 16 * i
            self.parts.append(f'<rect x="{W - M - 110}" y="{y - 8}" width="10" height="10" '
                              f'fill="{color}"/>')
            self.text(W - M - 95, y + 1, label)

    def render(self):
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def diagram_svg(diagram, title="persistence diagram"):
    """Birth/death scatter with the diagonal; essential points sit on a dashed top line."""
    finite = [v for p in diagram.pairs for v in (p.birth, p.death) if math.isfinite(v)]
    hi = max(finite, default=1.0) or 1.0
    lo = min(0.0, min(finite, default=0.0))
    top = hi + 0.1 * (hi - lo)
    c = _Canvas((lo, top), (lo, top), title)
    c.line(lo, lo, top, top, "gray")
    c.line(lo, hi, top, hi, "gray", dash=True)
    c.text(W - M - 4, c.py(hi) - 4, "inf", "end")
    dims = sorted({p.dim for p in diagram.pairs})
    for p in sorted(diagram.pairs, key=lambda p: (p.dim, p.birth, p.death)):
        c.circle(p.birth, p.death if math.isfinite(p.death) else hi, COLORS[p.dim % len(COLORS)])
    c.legend([(f"H{d}", COLORS[d % len(COLORS)]) for d in dims])
    c.ticks("birth", "death")
    return c.render()


def trace_svg(trace, title="total loss per iteration"):
    """G_t(W_t), L_supv and lambda * L_topo against the iteration index."""
    t = [r.t for r in trace.rows]
    series = [("G_t(W_t)", [r.G_t_Wt for r in trace.rows]),
              ("G_t+1(W_t+1)", [r.G_t1_Wt1 for r in trace.rows]),
              ("L_supv", [r.L_supv for r in trace.rows]),
              ("lambda*L_topo", [trace.lambda_topo * r.L_topo_refreshed for r in trace.rows])]
    ys = [v for _, s in series for v in s]
    c = _Canvas((0, max(max(t, default=0), 1)), (min(0.0, min(ys, default=0.0)),
                                                  max(ys, default=1.0) or 1.0), title)
    for i, (_, s) in enumerate(series):
        if len(s) == 1:
            c.circle(t[0], s[0], COLORS[i])
        elif s:
            c.polyline(t, s, COLORS[i])
    c.legend([(name, COLORS[i]) for i, (name, _) in enumerate(series)])
    c.ticks("iteration t", "loss")
    return c.render()


def write_svg(path, text):
    Path(path).write_text(text)
