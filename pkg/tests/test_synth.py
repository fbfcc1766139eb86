import pytest

from corvox.audio import load_wav
from corvox.clients import MockMtClient, MockTtsClient
from corvox.errors import ClientError
from corvox.manifest import compute_stats
from corvox.synth import DEFAULT_VOICES, VoicePair, forward_translate, synthesize_dataset
from corvox.textfilter import TextPair

from conftest import make_record


def make_pairs(n):
    return [
        TextPair(id=f"p{i:04d}", source_text=f"abairt ghearr {i}", target_text=f"short sentence {i}")
        for i in range(n)
    ]


class FlakyTts:
    """Fails the first ``fail_first`` calls, then delegates to the mock."""

    def __init__(self, fail_first):
        self.fail_first = fail_first
        self.calls = 0
        self.inner = MockTtsClient()

    def synthesize(self, text, voice, sample_rate):
        self.calls += 1
        if self.calls <= self.fail_first:
            raise ClientError("transient")
        return self.inner.synthesize(text, voice, sample_rate)


class BrokenForVoiceTts:
    def __init__(self, bad_voice):
        self.bad_voice = bad_voice
        self.inner = MockTtsClient()

    def synthesize(self, text, voice, sample_rate):
        if voice == self.bad_voice:
            raise ClientError("voice unavailable")
        return self.inner.synthesize(text, voice, sample_rate)


class TestSynthesizeDataset:
    def test_two_voices_double_the_pairs(self, tmp_path):
        manifest = synthesize_dataset(
            make_pairs(10), DEFAULT_VOICES, MockTtsClient(), tmp_path, max_workers=1
        )
        assert len(manifest) == 20
        voices = {rec.voice for rec in manifest}
        assert voices == {"female-1", "male-1"}

    def test_empty_input(self, tmp_path):
        manifest = synthesize_dataset([], DEFAULT_VOICES, MockTtsClient(), tmp_path)
        assert len(manifest) == 0

    def test_audio_files_load_and_durations_match(self, tmp_path):
        manifest = synthesize_dataset(
            make_pairs(4), DEFAULT_VOICES, MockTtsClient(), tmp_path, max_workers=1
        )
        total_ms = 0
        for rec in manifest:
            buf = load_wav(rec.audio_path)
            assert buf.duration_ms == rec.duration_ms > 0
            assert buf.sample_rate == 16000
            total_ms += buf.duration_ms
        assert compute_stats(manifest).train_duration_ms == total_ms

    def test_mock_is_byte_deterministic(self, tmp_path):
        pairs = make_pairs(2)
        m1 = synthesize_dataset(pairs, DEFAULT_VOICES, MockTtsClient(), tmp_path / "a", max_workers=1)
        m2 = synthesize_dataset(pairs, DEFAULT_VOICES, MockTtsClient(), tmp_path / "b", max_workers=4)
        for r1, r2 in zip(m1, m2):
            assert open(r1.audio_path, "rb").read() == open(r2.audio_path, "rb").read()

    def test_provenance_flags(self, tmp_path):
        manifest = synthesize_dataset(
            make_pairs(1), DEFAULT_VOICES, MockTtsClient(), tmp_path, dataset_name="Tatoeba-Speech"
        )
        for rec in manifest:
            assert rec.audio_origin == "synthetic"
            assert rec.translation_origin == "authentic"
            assert rec.split == "train"
            assert rec.dataset == "Tatoeba-Speech"

    def test_transient_failures_retried(self, tmp_path):
        tts = FlakyTts(fail_first=2)
        manifest = synthesize_dataset(
            make_pairs(3), DEFAULT_VOICES, tts, tmp_path, max_workers=1, retries=3, backoff=0.0
        )
        assert len(manifest) == 6

    def test_failures_under_ceiling_go_to_sidecar(self, tmp_path):
        # one voice always fails -> 50% failure rate, over the default ceiling
        tts = BrokenForVoiceTts(bad_voice="male-1")
        with pytest.raises(ClientError, match="ceiling"):
            synthesize_dataset(
                make_pairs(4), DEFAULT_VOICES, tts, tmp_path,
                max_workers=1, retries=1, backoff=0.0,
            )
        sidecar = tmp_path / "failures.jsonl"
        assert sidecar.exists()
        assert len(sidecar.read_text().splitlines()) == 4

    def test_failures_within_raised_ceiling_keep_run_alive(self, tmp_path):
        tts = BrokenForVoiceTts(bad_voice="male-1")
        manifest = synthesize_dataset(
            make_pairs(4), DEFAULT_VOICES, tts, tmp_path,
            max_workers=1, retries=1, backoff=0.0, failure_ceiling=0.6,
        )
        assert len(manifest) == 4  # the female-voice half survived

    def test_results_in_input_order(self, tmp_path):
        pairs = make_pairs(5)
        manifest = synthesize_dataset(pairs, DEFAULT_VOICES, MockTtsClient(), tmp_path, max_workers=4)
        expected = [f"{p.id}-{v}" for p in pairs for v in ("female-1", "male-1")]
        assert [rec.id for rec in manifest] == expected


class TestVoicePair:
    def test_voices_must_differ(self):
        with pytest.raises(ValueError):
            VoicePair("same", "same")


class TestForwardTranslate:
    def records_without_translation(self, n):
        return [
            make_record(i, transcript=f"focal {i}", translation="", dataset="SpokenWords")
            for i in range(n)
        ]

    def test_mock_contract(self):
        records = self.records_without_translation(3)
        out = forward_translate(records, MockMtClient(), max_workers=1)
        assert [r.translation for r in out] == [f"[EN] focal {i}" for i in range(3)]
        assert all(r.translation_origin == "MTed" for r in out)

    def test_mted_records_are_train_only(self):
        out = forward_translate(self.records_without_translation(2), MockMtClient())
        assert all(r.split == "train" for r in out)

    def test_already_translated_rejected(self):
        bad = [make_record(0, translation="already here")]
        with pytest.raises(ValueError, match="already"):
            forward_translate(bad, MockMtClient())

    def test_missing_transcript_rejected(self):
        bad = [make_record(0, transcript="  ", translation="")]
        with pytest.raises(ValueError, match="transcript"):
            forward_translate(bad, MockMtClient())

    def test_failures_dropped_and_counted(self, caplog):
        class Broken:
            def translate(self, text, source_lang, target_lang):
                raise ClientError("nope")

        out = forward_translate(
            self.records_without_translation(3), Broken(), max_workers=1, retries=1, backoff=0.0
        )
        assert out == []
        assert any("dropped" in r.message for r in caplog.records)

    def test_output_size_never_exceeds_input(self):
        records = self.records_without_translation(5)
        out = forward_translate(records, MockMtClient())
        assert len(out) <= len(records)
