"""Single entry point exposing the pipeline as subcommands.

Logs go to stderr; machine-readable results go to stdout or --out files,
never mixed. Exit codes: 0 success, 1 validation error, 2 runtime/client
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .audio import load_wav, profile, save_wav
from .augment import AugmentRecipe, augment_dataset
from .clients import make_embedder, make_mt_client, make_tts_client
from .config import PipelineConfig, load_config
from .errors import AudioError, ClientError, ConfigError, CorvoxError, ManifestError
from .manifest import (
    DatasetManifest,
    compose,
    compute_stats,
    load_manifest,
    per_dataset_stats,
    save_manifest,
)
from .metrics import SIGNATURE, evaluate, read_eval_pairs
from .plan import experiment_card
from .synth import VoicePair, forward_translate, synthesize_dataset
from .textfilter import (
    FilterConfig,
    filter_pipeline,
    load_wordlist,
    read_pairs_aligned,
    read_pairs_tsv,
    write_pairs_aligned,
    write_pairs_tsv,
)
from .vad import VadParams, apply_segments, basic_vad, detect_segments

log = logging.getLogger("corvox")


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)


def _pick(flag_value, config_value):
    return config_value if flag_value is None else flag_value


def _cmd_filter(args, config: PipelineConfig) -> int:
    if args.pairs:
        pairs = read_pairs_tsv(args.pairs)
    elif args.source and args.target:
        pairs = read_pairs_aligned(args.source, args.target)
    else:
        raise ConfigError("filter needs --pairs TSV or both --source and --target")
    source_list = _pick(args.source_wordlist, config.source_wordlist)
    target_list = _pick(args.target_wordlist, config.target_wordlist)
    filter_config = FilterConfig(
        source_lang=_pick(args.source_lang, config.source_lang),
        target_lang=_pick(args.target_lang, config.target_lang),
        max_words=_pick(args.max_words, config.max_words),
        source_wordlist=load_wordlist(source_list) if source_list else frozenset(),
        target_wordlist=load_wordlist(target_list) if target_list else frozenset(),
    )
    kept, report = filter_pipeline(pairs, filter_config)
    if args.out:
        write_pairs_tsv(kept, args.out)
    if args.out_source and args.out_target:
        write_pairs_aligned(kept, args.out_source, args.out_target)
    if args.report:
        Path(args.report).write_text(json.dumps(report.as_dict(), indent=2) + "\n")
    log.info("filter: kept %d of %d pairs", report.output, report.input)
    _emit(json.dumps(report.as_dict()), None)
    return 0


def _cmd_synth(args, config: PipelineConfig) -> int:
    pairs = read_pairs_tsv(args.pairs)
    voices = VoicePair(
        female_voice=_pick(args.female_voice, config.female_voice),
        male_voice=_pick(args.male_voice, config.male_voice),
    )
    tts = make_tts_client(_pick(args.tts, config.tts_url), retries=1)
    manifest = synthesize_dataset(
        pairs,
        voices,
        tts,
        args.out_dir,
        dataset_name=args.dataset,
        sample_rate=_pick(args.sample_rate, config.sample_rate),
        max_workers=_pick(args.max_workers, config.max_workers),
        retries=_pick(args.retries, config.retries),
        failure_ceiling=_pick(args.failure_ceiling, config.failure_ceiling),
    )
    save_manifest(manifest, args.manifest)
    log.info("synth: wrote %d utterances to %s", len(manifest), args.manifest)
    _emit(json.dumps({"utterances": len(manifest), "manifest": str(args.manifest)}), None)
    return 0


def _cmd_mt(args, config: PipelineConfig) -> int:
    manifest = load_manifest(args.manifest)
    mt = make_mt_client(_pick(args.mt, config.mt_url), retries=1)
    translated = forward_translate(
        list(manifest),
        mt,
        source_lang=_pick(args.source_lang, config.source_lang),
        target_lang=_pick(args.target_lang, config.target_lang),
        max_workers=_pick(args.max_workers, config.max_workers),
        retries=_pick(args.retries, config.retries),
    )
    out = DatasetManifest(manifest.name, tuple(translated))
    save_manifest(out, args.out)
    _emit(json.dumps({"translated": len(out), "manifest": str(args.out)}), None)
    return 0


def _vad_params(args, config: PipelineConfig) -> VadParams:
    base = config.inference.vad
    return VadParams(
        threshold=_pick(args.threshold, base.threshold),
        min_speech_duration_ms=_pick(args.min_speech_duration_ms, base.min_speech_duration_ms),
        max_speech_duration_s=_pick(args.max_speech_duration_s, base.max_speech_duration_s),
        min_silence_duration_ms=_pick(args.min_silence_duration_ms, base.min_silence_duration_ms),
        window_size_samples=_pick(args.window_size_samples, base.window_size_samples),
        speech_pad_ms=_pick(args.speech_pad_ms, base.speech_pad_ms),
    )


def _cmd_vad(args, config: PipelineConfig) -> int:
    buffer = load_wav(args.audio)
    if args.mode == "basic":
        gated = basic_vad(buffer, args.basic_threshold)
        segments = None
    else:
        params = _vad_params(args, config)
        segments = detect_segments(buffer, params)
        gated = apply_segments(buffer, segments)
    if len(gated) == 0:
        log.warning("vad removed every sample of %s; no output written", args.audio)
    elif args.out:
        save_wav(gated, args.out)
    if args.segments_json and segments is not None:
        Path(args.segments_json).write_text(
            json.dumps([seg.as_dict() for seg in segments], indent=2) + "\n"
        )
    _emit(
        json.dumps(
            {
                "input_ms": buffer.duration_ms,
                "output_ms": gated.duration_ms,
                "segments": [seg.as_dict() for seg in segments] if segments is not None else None,
            }
        ),
        None,
    )
    return 0


def _cmd_augment(args, config: PipelineConfig) -> int:
    manifest = load_manifest(args.manifest)
    base = config.augment
    recipe = AugmentRecipe(
        include_original=False if args.no_original else base.include_original,
        include_basic_vad=False if args.no_basic_vad else base.include_basic_vad,
        include_noise=False if args.no_noise else base.include_noise,
        vad_threshold=_pick(args.vad_threshold, base.vad_threshold),
        noise_scale=_pick(args.noise_scale, base.noise_scale),
        silence_ms=tuple(args.silence_ms) if args.silence_ms else base.silence_ms,
        gain_range=tuple(args.gain_range) if args.gain_range else base.gain_range,
        seed=_pick(args.seed, config.seed),
    )
    out = augment_dataset(
        manifest,
        recipe,
        render=not args.no_render,
        max_workers=_pick(args.max_workers, config.max_workers),
    )
    save_manifest(out, args.out)
    _emit(json.dumps({"records": len(out), "variants": recipe.variants()}), None)
    return 0


def _cmd_stats(args, config: PipelineConfig) -> int:
    manifest = load_manifest(args.manifest)
    total = compute_stats(manifest)
    if args.json:
        payload = {
            "datasets": {k: v.as_dict() for k, v in per_dataset_stats(manifest).items()},
            "total": total.as_dict(),
        }
        _emit(json.dumps(payload, indent=2), args.out)
        return 0
    lines = [f"{'Dataset':<24}{'Train Hours':>12}{'Train Segments':>16}{'Test Segments':>15}"]
    for name, stats in per_dataset_stats(manifest).items():
        lines.append(
            f"{name:<24}{stats.train_hours:>12}{stats.train_segments:>16,}{stats.test_segments:>15,}"
        )
    lines.append(
        f"{'TOTAL':<24}{total.train_hours:>12}{total.train_segments:>16,}{total.test_segments:>15,}"
    )
    _emit("\n".join(lines), args.out)
    return 0


def _cmd_compose(args, config: PipelineConfig) -> int:
    datasets = {}
    for spec_item in args.manifest:
        name, _, path = spec_item.partition("=")
        if not path:
            raise ConfigError(f"--manifest expects NAME=PATH, got {spec_item!r}")
        datasets[name] = load_manifest(path, name=name)
    recipe = _pick(args.recipe, config.recipe)
    combined = compose(datasets, recipe)
    if args.out:
        save_manifest(combined, args.out)
    stats = compute_stats(combined)
    _emit(
        json.dumps(
            {
                "recipe": recipe,
                "train_segments": stats.train_segments,
                "test_segments": stats.test_segments,
                "train_hours": stats.train_hours,
            }
        ),
        None,
    )
    return 0


def _cmd_eval(args, config: PipelineConfig) -> int:
    pairs = read_eval_pairs(args.hyp, args.ref)
    urls = args.embedder if args.embedder else list(config.embedder_urls)
    embedders = [make_embedder(url) for url in urls]
    report = evaluate(pairs, embedders)
    _emit(json.dumps(report.as_dict(), indent=2), args.out)
    if args.out:
        summary = {
            "bleu": report.bleu,
            "chrf_pp": report.chrf_pp,
            "wer": report.wer,
            "semantic": report.semantic,
        }
        print(json.dumps(summary))
    return 0


def _cmd_plan(args, config: PipelineConfig) -> int:
    manifest = load_manifest(args.manifest)
    stats = compute_stats(manifest)
    milestones = [int(s) for s in args.steps.split(",")] if args.steps else []
    card = experiment_card(
        config.training, config.inference, stats.train_segments, milestones
    )
    _emit(json.dumps(card, indent=2), args.out)
    return 0


def _cmd_profile(args, config: PipelineConfig) -> int:
    buffer = load_wav(args.audio)
    result = profile(buffer, args.silence_threshold)
    _emit(json.dumps(result.as_dict()), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corvox",
        description="Speech-translation corpus construction, augmentation, and evaluation.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"corvox {__version__} ({SIGNATURE})",
    )
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="filter a parallel text corpus")
    p.add_argument("--pairs", help="TSV file: source<TAB>target")
    p.add_argument("--source", help="source-side plain text file (aligned)")
    p.add_argument("--target", help="target-side plain text file (aligned)")
    p.add_argument("--out", help="filtered TSV output")
    p.add_argument("--out-source", help="filtered source-side text output (aligned)")
    p.add_argument("--out-target", help="filtered target-side text output (aligned)")
    p.add_argument("--report", help="filter report JSON output")
    p.add_argument("--max-words", type=int)
    p.add_argument("--source-lang")
    p.add_argument("--target-lang")
    p.add_argument("--source-wordlist")
    p.add_argument("--target-wordlist")
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("synth", help="synthesize two-voice audio for text pairs")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--manifest", required=True, help="output manifest JSONL")
    p.add_argument("--dataset", default="synthetic")
    p.add_argument("--tts", help="TTS endpoint URL or mock:")
    p.add_argument("--female-voice")
    p.add_argument("--male-voice")
    p.add_argument("--sample-rate", type=int)
    p.add_argument("--max-workers", type=int)
    p.add_argument("--retries", type=int)
    p.add_argument("--failure-ceiling", type=float)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("mt", help="fill missing translations via MT")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mt", help="MT endpoint URL or mock:")
    p.add_argument("--source-lang")
    p.add_argument("--target-lang")
    p.add_argument("--max-workers", type=int)
    p.add_argument("--retries", type=int)
    p.set_defaults(func=_cmd_mt)

    p = sub.add_parser("vad", help="gate an audio file")
    p.add_argument("--audio", required=True)
    p.add_argument("--out")
    p.add_argument("--mode", choices=["basic", "segments"], default="segments")
    p.add_argument("--basic-threshold", type=float, default=0.001)
    p.add_argument("--segments-json")
    p.add_argument("--threshold", type=float)
    p.add_argument("--min-speech-duration-ms", type=int)
    p.add_argument("--max-speech-duration-s", type=float)
    p.add_argument("--min-silence-duration-ms", type=int)
    p.add_argument("--window-size-samples", type=int)
    p.add_argument("--speech-pad-ms", type=int)
    p.set_defaults(func=_cmd_vad)

    p = sub.add_parser("augment", help="replicate a manifest per recipe variant")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-original", action="store_true", default=None)
    p.add_argument("--no-basic-vad", action="store_true", default=None)
    p.add_argument("--no-noise", action="store_true", default=None)
    p.add_argument("--vad-threshold", type=float)
    p.add_argument("--noise-scale", type=float)
    p.add_argument("--silence-ms", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--gain-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--seed", type=int)
    p.add_argument("--no-render", action="store_true", help="record arithmetic only")
    p.add_argument("--max-workers", type=int)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("stats", help="manifest statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("compose", help="combine datasets for a training recipe")
    p.add_argument("--recipe", choices=["A", "B", "B++", "C"])
    p.add_argument(
        "--manifest",
        action="append",
        required=True,
        metavar="NAME=PATH",
        help="repeat once per dataset",
    )
    p.add_argument("--out")
    p.set_defaults(func=_cmd_compose)

    p = sub.add_parser("eval", help="score hypotheses against references")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--embedder", action="append", help="embedder URL or mock:; repeatable")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("plan", help="emit a JSON experiment card")
    p.add_argument("--manifest", required=True)
    p.add_argument("--steps", help="comma-separated step milestones")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("profile", help="signal statistics for one audio file")
    p.add_argument("--audio", required=True)
    p.add_argument("--silence-threshold", type=float, default=0.001)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_profile)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except (ConfigError, ManifestError, AudioError, ValueError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return 1
    except ClientError as exc:
        log.error("%s", exc)
        return 2
    except (CorvoxError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
