"""Tests for chain logs, config loading, figure rendering, report export."""

import json
import math

import numpy as np
import pytest

from colorelicit.chainlog import (
    config_digest,
    output_from_log,
    read_chain_log,
    read_reference_histogram,
    replay_entries,
    write_chain_log,
)
from colorelicit.colors import GRID_SHAPE, HslColor
from colorelicit.config import DEFAULT_OBJECTS, load_config, parse_config
from colorelicit.diagnostics import AlignmentReport, AlignmentRow, cumulative_rhat
from colorelicit.errors import ConfigError, EmptySampleSet, EmptyTrace, LogError
from colorelicit.figures import render_color_strip, render_rhat_trace, render_scatter_kde
from colorelicit.queries import (
    Choice,
    ColorCode,
    DimensionFill,
    DimensionValue,
    MatchJudgment,
    PairwiseChoice,
    ReportColor,
    YesNo,
)
from colorelicit.reportio import export_report
from colorelicit.respondents import OracleRespondent, ReplayRespondent
from colorelicit.samplers import (
    ChainOutput,
    ChainRecord,
    SamplerConfig,
    run_direct_prompting,
    run_gibbs,
    run_mcmc,
)
from colorelicit.targets import TargetSpec

GAUSS = TargetSpec([(1.0, (180.0, 50.0, 50.0), (15.0, 10.0, 10.0))])


def random_color(rng):
    return HslColor(
        int(rng.integers(0, 360)), int(rng.integers(0, 101)), int(rng.integers(0, 101))
    )


def random_record(rng, chain_id, iteration):
    kind = int(rng.integers(0, 4))
    state = random_color(rng)
    result = random_color(rng)
    if kind == 0:
        query = ReportColor("obj")
        answer = ColorCode(result)
        method = "direct_prompting"
    elif kind == 1:
        query = MatchJudgment("obj", state)
        answer = YesNo(bool(rng.integers(0, 2)))
        method = "direct_sampling"
    elif kind == 2:
        query = PairwiseChoice("obj", state, result)
        answer = Choice("A" if rng.integers(0, 2) else "B")
        method = "mcmc"
    else:
        query = DimensionFill.from_state("obj", state, "s")
        answer = DimensionValue(int(rng.integers(-50, 200)))
        method = "gibbs"
    return ChainRecord(
        chain_id=chain_id,
        iteration=iteration,
        method=method,
        state=state,
        proposal=random_color(rng) if kind == 2 else None,
        proposal_kind="gaussian" if kind == 2 else "n/a",
        presented_first="candidate" if kind == 2 else "n/a",
        query=query,
        query_rendered="prompt text with unicode ’ and [brackets]",
        raw_answer="raw\nanswer",
        answer=answer,
        result=result,
        accepted=bool(rng.integers(0, 2)) if kind == 2 else None,
        flags=("fill_out_of_range",) if kind == 3 and rng.integers(0, 2) else (),
        timestamp=None if rng.integers(0, 2) else "2026-01-01T00:00:00+00:00",
    )


class TestChainLogRoundTrip:
    def test_random_records_round_trip(self, tmp_path):
        rng = np.random.default_rng(271)
        records = [random_record(rng, 3, i) for i in range(40)]
        output = ChainOutput(
            object="obj",
            method="mixed",
            chain_id=3,
            samples=[r.result for r in records],
            sample_iterations=[r.iteration for r in records],
            records=records,
            accept_count=7,
            complete=True,
        )
        path = tmp_path / "chain.jsonl"
        write_chain_log(path, output, master_seed=99, digest="abc123")
        header, back = read_chain_log(path)
        assert header.object == "obj"
        assert header.master_seed == 99
        assert header.config_digest == "abc123"
        assert header.accept_count == 7
        assert back == records

    def test_incomplete_chain_header(self, tmp_path):
        output = ChainOutput(
            "obj", "mcmc", 0, [], [], [], 0, complete=False,
            failure="RespondentFailure: gave up",
        )
        path = tmp_path / "chain.jsonl"
        write_chain_log(path, output, master_seed=1)
        header, _ = read_chain_log(path)
        assert not header.complete
        assert "gave up" in header.failure

    def test_truncated_line_reports_position_and_partial(self, tmp_path):
        rng = np.random.default_rng(277)
        records = [random_record(rng, 0, i) for i in range(5)]
        output = ChainOutput(
            "obj", "mcmc", 0, [r.result for r in records],
            [r.iteration for r in records], records, 2, True,
        )
        path = tmp_path / "chain.jsonl"
        write_chain_log(path, output, master_seed=1)
        text = path.read_text(encoding="utf-8")
        lines = text.splitlines()
        lines[-1] = lines[-1][: len(lines[-1]) // 2]  # truncate final line
        path.write_text("\n".join(lines), encoding="utf-8")
        with pytest.raises(LogError) as info:
            read_chain_log(path)
        assert info.value.line_number == 6
        assert info.value.partial == records[:4]

    def test_unknown_fields_preserved(self, tmp_path):
        rng = np.random.default_rng(281)
        record = random_record(rng, 0, 0)
        output = ChainOutput("obj", "mcmc", 0, [record.result], [0], [record], 0, True)
        path = tmp_path / "chain.jsonl"
        write_chain_log(path, output, master_seed=1)
        lines = path.read_text(encoding="utf-8").splitlines()
        data = json.loads(lines[1])
        data["future_field"] = {"nested": [1, 2, 3]}
        lines[1] = json.dumps(data, ensure_ascii=False)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        _, back = read_chain_log(path)
        assert back[0].extras == {"future_field": {"nested": [1, 2, 3]}}
        # writing again keeps the extra field
        out2 = ChainOutput("obj", "mcmc", 0, [back[0].result], [0], back, 0, True)
        write_chain_log(path, out2, master_seed=1)
        _, back2 = read_chain_log(path)
        assert back2[0].extras == {"future_field": {"nested": [1, 2, 3]}}

    def test_digest_mismatch_warns(self, tmp_path):
        output = ChainOutput("obj", "mcmc", 0, [], [], [], 0, True)
        path = tmp_path / "chain.jsonl"
        write_chain_log(path, output, master_seed=1, digest="aaa")
        with pytest.warns(UserWarning, match="digest"):
            read_chain_log(path, expected_digest="bbb")

    def test_empty_file_is_log_error(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(LogError):
            read_chain_log(path)

    def test_digest_is_stable(self):
        a = config_digest({"b": 1, "a": [1, 2]})
        b = config_digest({"a": [1, 2], "b": 1})
        assert a == b and len(a) == 12


class TestLogReplay:
    def test_mcmc_log_replay_reproduces_samples(self, tmp_path):
        cfg = SamplerConfig(method="mcmc", iterations=50)
        oracle = OracleRespondent(GAUSS, np.random.default_rng(283))
        original = run_mcmc("obj", oracle, cfg, np.random.default_rng(293))
        path = tmp_path / "chain.jsonl"
        write_chain_log(path, original, master_seed=293)
        header, records = read_chain_log(path)
        rebuilt = output_from_log(header, records)
        assert rebuilt.samples == original.samples
        replayed = run_mcmc(
            "obj",
            ReplayRespondent(replay_entries(records)),
            cfg,
            np.random.default_rng(293),
        )
        assert replayed.samples == original.samples

    def test_gibbs_log_rebuild(self, tmp_path):
        cfg = SamplerConfig(method="gibbs", iterations=30)
        oracle = OracleRespondent(GAUSS, np.random.default_rng(307))
        original = run_gibbs("obj", oracle, cfg, np.random.default_rng(311))
        path = tmp_path / "g.jsonl"
        write_chain_log(path, original, master_seed=311)
        header, records = read_chain_log(path)
        rebuilt = output_from_log(header, records)
        assert rebuilt.samples == original.samples
        assert rebuilt.sample_iterations == original.sample_iterations

    def test_llm_mode_log_replay_and_no_key_leak(self, tmp_path, chat_server, monkeypatch):
        from colorelicit.respondents import LlmRespondent, RespondentConfig

        server, endpoint = chat_server
        monkeypatch.setenv("EXAMPLE_KEY", "super-secret-api-key")
        replies = ["120, 80, 40", "121, 81, 41", "5, 95, 55", "300, 20, 70"]
        server.script.extend(replies)
        respondent = LlmRespondent(
            RespondentConfig(
                kind="llm", endpoint=endpoint, model="m",
                api_key_env="EXAMPLE_KEY", timeout=5.0,
            )
        )
        cfg = SamplerConfig(method="direct_prompting", iterations=4)
        original = run_direct_prompting("obj", respondent, cfg)
        path = tmp_path / "llm.jsonl"
        write_chain_log(path, original, master_seed=0)
        text = path.read_text(encoding="utf-8")
        assert "super-secret-api-key" not in text
        assert "EXAMPLE_KEY" not in text
        header, records = read_chain_log(path)
        replayed = run_direct_prompting(
            "obj", ReplayRespondent(replay_entries(records)), cfg
        )
        assert replayed.samples == original.samples
        assert [r.raw_answer for r in replayed.records] == replies


class TestReferenceHistogram:
    def test_load_and_normalize(self, tmp_path):
        rng = np.random.default_rng(313)
        mass = rng.random(1800) * 3
        path = tmp_path / "ref.txt"
        path.write_text("\n".join(str(v) for v in mass), encoding="utf-8")
        hist = read_reference_histogram(path)
        assert hist.bins.shape == GRID_SHAPE
        assert hist.bins.sum() == pytest.approx(1.0, abs=1e-9)
        want = (mass / mass.sum()).reshape(GRID_SHAPE)
        np.testing.assert_allclose(hist.bins, want)

    def test_wrong_size_rejected(self, tmp_path):
        path = tmp_path / "ref.txt"
        path.write_text("1 2 3", encoding="utf-8")
        with pytest.raises(ValueError):
            read_reference_histogram(path)


ORACLE_YAML = """
method: gibbs
seed: 42
objects: [Strawberry]
sampler:
  iterations: 25
  chains: 2
respondent:
  kind: oracle
target:
  components:
    - weight: 1.0
      mean: [0, 90, 45]
      stddev: [15, 10, 10]
"""


class TestConfig:
    def test_minimal_oracle_defaults(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            "respondent: {kind: oracle}\n"
            "target:\n"
            "  components:\n"
            "    - {weight: 1.0, mean: [0, 90, 45], stddev: [15, 10, 10]}\n",
            encoding="utf-8",
        )
        cfg = load_config(path)
        assert cfg.sampler.iterations == 500
        assert cfg.sampler.chains == 4
        assert cfg.respondent.temperature == 1.0
        assert cfg.sampler.uniform_jump == 0.1
        assert cfg.objects == DEFAULT_OBJECTS

    def test_full_oracle_config(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(ORACLE_YAML, encoding="utf-8")
        cfg = load_config(path)
        assert cfg.method == "gibbs"
        assert cfg.sampler.master_seed == 42
        assert cfg.sampler.iterations == 25
        assert cfg.target is not None

    def test_llm_without_endpoint(self):
        with pytest.raises(ConfigError) as info:
            parse_config({"respondent": {"kind": "llm", "model": "m"}})
        assert "endpoint" in str(info.value)

    def test_oracle_without_target(self):
        with pytest.raises(ConfigError) as info:
            parse_config({"respondent": {"kind": "oracle"}})
        assert info.value.field == "target"

    def test_unknown_method_lists_choices(self):
        with pytest.raises(ConfigError) as info:
            parse_config({"method": "simulated_annealing"})
        message = str(info.value)
        for m in ("direct_prompting", "direct_sampling", "mcmc", "gibbs"):
            assert m in message

    def test_unknown_field_named(self):
        with pytest.raises(ConfigError) as info:
            parse_config(
                {
                    "respondent": {"kind": "oracle", "tempreture": 1.0},
                    "target": {"components": [
                        {"weight": 1.0, "mean": [0, 0, 0], "stddev": [1, 1, 1]}
                    ]},
                }
            )
        assert "tempreture" in str(info.value)

    def test_relative_paths_resolve_against_config(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            ORACLE_YAML + "output: out/here\n", encoding="utf-8"
        )
        cfg = load_config(path)
        assert cfg.out_dir == tmp_path / "out/here"


def mcmc_chains(n=3, iterations=40):
    cfg = SamplerConfig(method="mcmc", iterations=iterations)
    outs = []
    for i in range(n):
        oracle = OracleRespondent(GAUSS, np.random.default_rng(400 + i))
        outs.append(
            run_mcmc("obj", oracle, cfg, np.random.default_rng(500 + i), chain_id=i)
        )
    return outs


class TestFigures:
    def test_color_strip_dimensions(self, tmp_path):
        from PIL import Image

        chains = [[HslColor(0, 100, 50)] * 500 for _ in range(4)]
        path = render_color_strip(chains, tmp_path / "strip.png")
        with Image.open(path) as img:
            assert img.size == (500, 4)  # (width, height)
            assert img.getpixel((0, 0)) == (255, 0, 0)

    def test_color_strip_constant_chain_is_solid(self, tmp_path):
        from PIL import Image

        chains = [[HslColor(120, 100, 50)] * 20]
        path = render_color_strip(chains, tmp_path / "strip.png")
        with Image.open(path) as img:
            colors = {img.getpixel((x, 0)) for x in range(20)}
        assert colors == {(0, 255, 0)}

    def test_color_strip_deterministic(self, tmp_path):
        chains = [c.samples for c in mcmc_chains(2, 30)]
        a = render_color_strip(chains, tmp_path / "a.png")
        b = render_color_strip(chains, tmp_path / "b.png")
        assert a.read_bytes() == b.read_bytes()

    def test_color_strip_empty_rejected(self, tmp_path):
        with pytest.raises(EmptySampleSet):
            render_color_strip([[]], tmp_path / "strip.png")

    def test_rhat_trace_renders_and_is_deterministic(self, tmp_path):
        chains = [c.samples for c in mcmc_chains(3, 40)]
        trace = cumulative_rhat(chains)
        a = render_rhat_trace({"obj (mcmc)": trace}, tmp_path / "a.png")
        b = render_rhat_trace({"obj (mcmc)": trace}, tmp_path / "b.png")
        assert a.read_bytes() == b.read_bytes()
        assert a.stat().st_size > 0

    def test_rhat_trace_with_infinite_entries(self, tmp_path):
        chains = [[HslColor(7, 7, 7)] * 5, [HslColor(100, 7, 7)] * 5]
        trace = cumulative_rhat(chains)
        assert math.isinf(trace.values[0])
        path = render_rhat_trace({"separated": trace}, tmp_path / "inf.png")
        assert path.stat().st_size > 0

    def test_rhat_trace_empty_rejected(self, tmp_path):
        trace = cumulative_rhat([[HslColor(1, 1, 1)] * 4] * 2)
        trace.values = []
        trace.iterations = []
        with pytest.raises(EmptyTrace):
            render_rhat_trace({"x": trace}, tmp_path / "x.png")
        with pytest.raises(EmptyTrace):
            render_rhat_trace({}, tmp_path / "x.png")

    def test_scatter_kde_single_sample(self, tmp_path):
        path = render_scatter_kde([HslColor(100, 50, 50)], tmp_path / "s.png")
        assert path.stat().st_size > 0

    def test_scatter_kde_deterministic(self, tmp_path):
        samples = mcmc_chains(1, 60)[0].samples
        a = render_scatter_kde(samples, tmp_path / "a.png")
        b = render_scatter_kde(samples, tmp_path / "b.png")
        assert a.read_bytes() == b.read_bytes()

    def test_scatter_kde_empty_rejected(self, tmp_path):
        with pytest.raises(EmptySampleSet):
            render_scatter_kde([], tmp_path / "s.png")


class TestExportReport:
    def _report(self):
        rows = []
        for obj in ("Chocolate", "Lemon"):
            for mi, method in enumerate(
                ("direct_prompting", "direct_sampling", "mcmc", "gibbs")
            ):
                rows.append(
                    AlignmentRow(obj, method, 0.9 - 0.1 * mi, 5.0 + mi, 4)
                )
        return AlignmentReport(rows=rows)

    def test_csv_shape_and_precision(self, tmp_path):
        report = self._report()
        csv_path = export_report(report, tmp_path / "report.csv")
        lines = csv_path.read_text(encoding="utf-8").strip().splitlines()
        assert len(lines) == 3  # header + 2 objects
        header = lines[0].split(",")
        assert len(header) == 1 + 2 * 4
        first = lines[1].split(",")
        assert first[0] == "Chocolate"
        assert float(first[1]) == 0.9  # full precision round trip
        assert float(first[2]) == 5.0

    def test_text_marks_row_minimum(self, tmp_path):
        report = self._report()
        export_report(report, tmp_path / "r.csv", tmp_path / "r.txt")
        text = (tmp_path / "r.txt").read_text(encoding="utf-8")
        # gibbs has the lowest hellinger (0.6), direct_prompting the lowest mode (5.0)
        assert "0.60*" in text
        assert "(5.0*)" in text
        assert "0.90*" not in text

    def test_single_method_report_valid(self, tmp_path):
        report = AlignmentReport(rows=[AlignmentRow("obj", "mcmc", 0.5, 1.0, 4)])
        export_report(report, tmp_path / "r.csv", tmp_path / "r.txt")
        text = (tmp_path / "r.txt").read_text(encoding="utf-8")
        assert "*" not in text

    def test_empty_report_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            export_report(AlignmentReport(rows=[]), tmp_path / "r.csv")
