"""
Proficiency, descriptor and loading maps
========================================

Render the map types to SVG files in ``demo_output/``. The same files come
out of the ``lpca plot`` command.
"""

from pathlib import Path

from lpca import FitConfig, fit, plot
from lpca.synth import GeneratorSpec, generate, to_table

out = Path("demo_output")
out.mkdir(exist_ok=True)

sd = generate(GeneratorSpec(n=1000, d=24, k=1, seed=3))
table = to_table(sd)
res = fit(sd.data, "bernoulli", FitConfig(k=2))

# examinees colored by proficiency band, with one item's 0.5 line on top
spec = plot.PlotSpec(color_mode="proficiency", overlay_levelset="D1")
(out / "proficiency.svg").write_text(
    plot.render(spec, res.params, res.scores, table))

# one descriptor: who is predicted to get it right
spec = plot.PlotSpec(color_mode="descriptor", target="D1")
(out / "descriptor_D1.svg").write_text(
    plot.render(spec, res.params, res.scores, table))

# share of each descriptor in PC1
spec = plot.PlotSpec(kind="loadings", axes=(1, 2))
(out / "loadings_pc1.svg").write_text(plot.render(spec, res.params))

print(sorted(p.name for p in out.glob("*.svg")))
