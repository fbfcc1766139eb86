import json

import numpy as np
import pytest

from corvox.audio import AudioBuffer, load_wav, save_wav
from corvox.cli import main
from corvox.manifest import load_manifest, save_manifest
from corvox.textfilter import read_pairs_tsv

from conftest import make_manifest, make_record, make_tone


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_toy_tsv(path, n=6):
    lines = [f"abairt uimhir a {i} sa chorpas\tsentence number {i} in the corpus" for i in range(n)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestFilterCommand:
    def test_filter_writes_output_and_report(self, tmp_path, capsys):
        pairs = write_toy_tsv(tmp_path / "in.tsv")
        out = tmp_path / "out.tsv"
        report = tmp_path / "report.json"
        code, stdout, _ = run_cli(
            capsys, "filter", "--pairs", str(pairs), "--out", str(out), "--report", str(report)
        )
        assert code == 0
        payload = json.loads(stdout)
        assert payload["input"] == 6
        assert payload["input"] - payload["output"] == (
            payload["removed_dedup"]
            + payload["removed_length"]
            + payload["removed_langid"]
            + payload["removed_toxicity"]
        )
        assert json.loads(report.read_text()) == payload
        assert len(read_pairs_tsv(out)) == payload["output"]

    def test_missing_input_is_validation_error(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "filter", "--pairs", str(tmp_path / "absent.tsv"))
        assert code == 1

    def test_aligned_input_and_output(self, tmp_path, capsys):
        src = tmp_path / "src.txt"
        tgt = tmp_path / "tgt.txt"
        src.write_text("Tá an lá go maith inniu\nTá an oíche fuar\n", encoding="utf-8")
        tgt.write_text("The day is good today\nThe night is cold\n", encoding="utf-8")
        out_src = tmp_path / "out.ga"
        out_tgt = tmp_path / "out.en"
        code, stdout, _ = run_cli(
            capsys,
            "filter", "--source", str(src), "--target", str(tgt),
            "--out-source", str(out_src), "--out-target", str(out_tgt),
        )
        assert code == 0
        assert json.loads(stdout)["output"] == 2
        assert out_src.read_text().splitlines() == src.read_text().splitlines()
        assert out_tgt.read_text().splitlines() == tgt.read_text().splitlines()


class TestSynthCommand:
    def test_synth_mock_writes_manifest_and_audio(self, tmp_path, capsys):
        pairs = write_toy_tsv(tmp_path / "in.tsv", n=3)
        manifest_path = tmp_path / "m.jsonl"
        code, stdout, _ = run_cli(
            capsys,
            "synth",
            "--pairs", str(pairs),
            "--out-dir", str(tmp_path / "audio"),
            "--manifest", str(manifest_path),
            "--tts", "mock:",
            "--max-workers", "1",
        )
        assert code == 0
        assert json.loads(stdout)["utterances"] == 6
        manifest = load_manifest(manifest_path)
        assert len(manifest) == 6
        for rec in manifest:
            assert load_wav(rec.audio_path).duration_ms == rec.duration_ms


class TestMtCommand:
    def test_mock_translation_fills_records(self, tmp_path, capsys):
        from corvox.manifest import DatasetManifest

        records = tuple(
            make_record(i, transcript=f"téacs {i}", translation="", dataset="SpokenWords")
            for i in range(3)
        )
        src = tmp_path / "in.jsonl"
        save_manifest(DatasetManifest("SpokenWords", records), src)
        out = tmp_path / "out.jsonl"
        code, stdout, _ = run_cli(capsys, "mt", "--manifest", str(src), "--out", str(out), "--mt", "mock:")
        assert code == 0
        translated = load_manifest(out)
        assert all(r.translation.startswith("[EN] ") for r in translated)
        assert all(r.translation_origin == "MTed" and r.split == "train" for r in translated)

    def test_already_translated_manifest_is_validation_error(self, tmp_path, capsys):
        src = tmp_path / "in.jsonl"
        save_manifest(make_manifest("x", 2), src)  # records carry translations
        code, _, _ = run_cli(capsys, "mt", "--manifest", str(src), "--out", str(tmp_path / "o.jsonl"))
        assert code == 1


class TestVadCommand:
    def test_basic_mode(self, tmp_path, capsys):
        samples = np.concatenate([np.zeros(8000), make_tone(duration_s=0.5)])
        wav = tmp_path / "in.wav"
        save_wav(AudioBuffer(samples, 16000), wav)
        out = tmp_path / "out.wav"
        code, stdout, _ = run_cli(
            capsys, "vad", "--audio", str(wav), "--out", str(out), "--mode", "basic"
        )
        assert code == 0
        result = json.loads(stdout)
        assert result["output_ms"] < result["input_ms"]
        assert load_wav(out).duration_ms == result["output_ms"]

    def test_segments_mode_emits_json(self, tmp_path, capsys):
        samples = np.concatenate([np.zeros(48000), make_tone(duration_s=1.0), np.zeros(48000)])
        wav = tmp_path / "in.wav"
        save_wav(AudioBuffer(samples, 16000), wav)
        seg_json = tmp_path / "segments.json"
        code, stdout, _ = run_cli(
            capsys,
            "vad", "--audio", str(wav), "--out", str(tmp_path / "out.wav"),
            "--segments-json", str(seg_json),
        )
        assert code == 0
        segments = json.loads(seg_json.read_text())
        assert len(segments) == 1
        assert set(segments[0]) == {"start_ms", "end_ms"}


class TestAugmentCommand:
    def test_no_render_triples(self, tmp_path, capsys):
        manifest_path = tmp_path / "in.jsonl"
        save_manifest(make_manifest("x", 5), manifest_path)
        out = tmp_path / "out.jsonl"
        code, stdout, _ = run_cli(
            capsys, "augment", "--manifest", str(manifest_path), "--out", str(out), "--no-render"
        )
        assert code == 0
        assert json.loads(stdout)["records"] == 15
        assert len(load_manifest(out)) == 15

    def test_optional_variant_flags(self, tmp_path, capsys):
        manifest_path = tmp_path / "in.jsonl"
        save_manifest(make_manifest("x", 2), manifest_path)
        out = tmp_path / "out.jsonl"
        code, stdout, _ = run_cli(
            capsys,
            "augment", "--manifest", str(manifest_path), "--out", str(out),
            "--silence-ms", "10", "90", "--gain-range", "0.5", "1.2", "--no-render",
        )
        assert code == 0
        payload = json.loads(stdout)
        assert payload["variants"] == ["original", "basic_vad", "noise", "silence", "gain"]
        assert payload["records"] == 10

    def test_outputs_byte_identical_across_parallelism(self, tmp_path, capsys):
        # identical inputs, config, and seed must give byte-identical
        # manifests and audio regardless of worker count
        from corvox.audio import AudioBuffer, save_wav

        records = []
        for i in range(4):
            wav = tmp_path / f"u{i}.wav"
            save_wav(AudioBuffer(make_tone(duration_s=0.1, amplitude=0.4), 16000), wav)
            records.append(make_record(i, dataset="d", audio_path=str(wav), duration_ms=100))
        from corvox.manifest import DatasetManifest

        manifest_path = tmp_path / "in.jsonl"
        save_manifest(DatasetManifest("d", tuple(records)), manifest_path)
        outputs = []
        audio_snapshots = []
        for workers in ("1", "4"):
            out = tmp_path / f"out-{workers}.jsonl"
            code, _, _ = run_cli(
                capsys,
                "augment", "--manifest", str(manifest_path), "--out", str(out),
                "--seed", "3", "--max-workers", workers,
            )
            assert code == 0
            outputs.append(out.read_bytes())
            audio_snapshots.append(
                {rec.audio_path: open(rec.audio_path, "rb").read() for rec in load_manifest(out)}
            )
        assert outputs[0] == outputs[1]
        assert audio_snapshots[0] == audio_snapshots[1]


class TestStatsCommand:
    def test_empty_manifest(self, tmp_path, capsys):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        code, stdout, _ = run_cli(capsys, "stats", "--manifest", str(path))
        assert code == 0
        assert "0:00" in stdout

    def test_json_mode(self, tmp_path, capsys):
        path = tmp_path / "m.jsonl"
        save_manifest(make_manifest("demo", 3, duration_ms=20 * 60 * 1000), path)
        code, stdout, _ = run_cli(capsys, "stats", "--manifest", str(path), "--json")
        assert code == 0
        payload = json.loads(stdout)
        assert payload["total"]["train_hours"] == "1:00"
        assert payload["total"]["train_segments"] == 3


class TestComposeCommand:
    def test_compose_b_plus_plus(self, tmp_path, capsys):
        from test_manifest import TABLE_COUNTS

        args = ["compose", "--recipe", "B++", "--out", str(tmp_path / "out.jsonl")]
        for name, (n_train, n_test) in TABLE_COUNTS.items():
            path = tmp_path / f"{name}.jsonl"
            save_manifest(make_manifest(name, n_train, n_test), path)
            args += ["--manifest", f"{name}={path}"]
        code, stdout, _ = run_cli(capsys, *args)
        assert code == 0
        payload = json.loads(stdout)
        assert payload["train_segments"] == 115987
        assert payload["test_segments"] == 347

    def test_missing_dataset_is_validation_error(self, tmp_path, capsys):
        path = tmp_path / "only.jsonl"
        save_manifest(make_manifest("IWSLT-2023", 2), path)
        code, _, err = run_cli(capsys, "compose", "--recipe", "A", "--manifest", f"IWSLT-2023={path}")
        assert code == 1


class TestEvalCommand:
    def test_identity_files(self, tmp_path, capsys):
        text = "the cat sat on the mat\na second longer sentence here\n"
        hyp = tmp_path / "hyp.txt"
        ref = tmp_path / "ref.txt"
        hyp.write_text(text)
        ref.write_text(text)
        code, stdout, _ = run_cli(capsys, "eval", "--hyp", str(hyp), "--ref", str(ref))
        assert code == 0
        payload = json.loads(stdout)
        assert payload["bleu"] == 100.0
        assert payload["wer"] == 0.0
        assert payload["semantic"]["hashed-bow"] == 100.0

    def test_report_file_and_summary(self, tmp_path, capsys):
        hyp = tmp_path / "hyp.txt"
        ref = tmp_path / "ref.txt"
        hyp.write_text("the dog sat on a log\n")
        ref.write_text("the cat sat on the mat\n")
        out = tmp_path / "report.json"
        code, stdout, _ = run_cli(
            capsys, "eval", "--hyp", str(hyp), "--ref", str(ref), "--out", str(out)
        )
        assert code == 0
        report = json.loads(out.read_text())
        summary = json.loads(stdout)
        assert summary["bleu"] == report["bleu"]
        assert report["segments"]


class TestPlanCommand:
    def test_card_output(self, tmp_path, capsys):
        path = tmp_path / "m.jsonl"
        save_manifest(make_manifest("x", 48719 // 1000), path)  # small stand-in
        config = tmp_path / "c.json"
        config.write_text(json.dumps({"training": {"total_steps": 3000, "warmup_ratio": 0.03}}))
        code, stdout, _ = run_cli(
            capsys, "--config", str(config), "plan", "--manifest", str(path), "--steps", "100,200"
        )
        assert code == 0
        card = json.loads(stdout)
        assert card["warmup_steps"] == 90
        assert [m["steps"] for m in card["epoch_milestones"]] == [100, 200]


class TestProfileCommand:
    def test_profile_json(self, wav_file, capsys):
        code, stdout, _ = run_cli(capsys, "profile", "--audio", str(wav_file))
        assert code == 0
        payload = json.loads(stdout)
        assert set(payload) == {"duration_ms", "rms", "peak", "leading_silence_ms", "noise_floor"}


class TestExitCodes:
    def test_bad_config_is_1(self, tmp_path, capsys):
        bad = tmp_path / "c.json"
        bad.write_text("{broken")
        code, _, _ = run_cli(capsys, "--config", str(bad), "stats", "--manifest", "x")
        assert code == 1

    def test_client_failure_is_2(self, tmp_path, capsys):
        pairs = write_toy_tsv(tmp_path / "in.tsv", n=2)
        code, _, _ = run_cli(
            capsys,
            "synth",
            "--pairs", str(pairs),
            "--out-dir", str(tmp_path / "a"),
            "--manifest", str(tmp_path / "m.jsonl"),
            "--tts", "http://127.0.0.1:1/tts",
            "--retries", "1",
            "--max-workers", "1",
        )
        assert code == 2

    def test_version_prints_signature(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert "chrf" in capsys.readouterr().out
