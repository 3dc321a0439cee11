import xml.etree.ElementTree as ET

import numpy as np
import pytest

from fracid.exceptions import ValidationError
from fracid.svgplot import line_plot, pole_zero_plot, stem_plot

SVG_NS = "{http://www.w3.org/2000/svg}"


def parse(svg: str) -> ET.Element:
    return ET.fromstring(svg)


class TestLinePlot:
    def test_valid_xml_with_one_polyline_per_series(self):
        t = np.linspace(0, 1, 50)
        svg = line_plot(
            [(t, np.sin(t), "sin"), (t, np.cos(t), "cos")],
            title="waves",
            xlabel="t",
            ylabel="y",
        )
        root = parse(svg)
        assert root.tag == f"{SVG_NS}svg"
        polylines = root.findall(f"{SVG_NS}polyline")
        assert len(polylines) == 2
        texts = [el.text for el in root.findall(f"{SVG_NS}text")]
        for label in ("waves", "t", "y", "sin", "cos"):
            assert label in texts

    def test_deterministic(self):
        t = np.linspace(0, 5, 30)
        a = line_plot([(t, np.exp(-t), "")])
        b = line_plot([(t, np.exp(-t), "")])
        assert a == b

    def test_escaping(self):
        svg = line_plot([([0, 1], [0, 1], "a<b&c")], title='q "x" <tag>')
        assert "<tag>" not in svg
        assert "&amp;" in svg and "&lt;" in svg
        parse(svg)  # still well-formed

    def test_rejects(self):
        with pytest.raises(ValidationError, match="at least one series"):
            line_plot([])
        with pytest.raises(ValidationError, match="equal-length"):
            line_plot([([0, 1], [0, 1, 2], "bad")])

    def test_constant_series_padded_limits(self):
        svg = line_plot([([0, 1], [2.0, 2.0], "")])
        parse(svg)
        assert "NaN" not in svg and "nan" not in svg


class TestStemPlot:
    def test_two_stems_per_order(self):
        svg = stem_plot([0.25, 0.5, 0.75], [1.0, 0.0, -0.5], [2.0, 1.0, 0.5])
        root = parse(svg)
        circles = root.findall(f"{SVG_NS}circle")
        assert len(circles) == 6
        parse(svg)

    def test_rejects_mismatch(self):
        with pytest.raises(ValidationError, match="equal-length"):
            stem_plot([0.25], [1.0, 2.0], [1.0])


class TestPoleZeroPlot:
    def test_markers_and_cone_rays(self):
        poles = [1 + 1j, 1 - 1j]
        zeros = [0.5 + 0j]
        svg = pole_zero_plot(poles, zeros, 0.25, title="pz")
        root = parse(svg)
        assert len(root.findall(f"{SVG_NS}path")) == 2  # one X per pole
        assert len(root.findall(f"{SVG_NS}circle")) == 1
        dashed = [
            el
            for el in root.findall(f"{SVG_NS}line")
            if el.get("stroke-dasharray")
        ]
        assert len(dashed) == 4  # two cone rays, both signs

    def test_empty_rejected(self):
        with pytest.raises(ValidationError, match="nothing to plot"):
            pole_zero_plot([], [], 0.25)

    def test_deterministic(self):
        a = pole_zero_plot([1j, -1j], [], 0.5)
        b = pole_zero_plot([1j, -1j], [], 0.5)
        assert a == b
