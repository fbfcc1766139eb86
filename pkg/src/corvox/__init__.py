"""corvox: corpus construction, augmentation, and evaluation for
low-resource speech translation.

Submodules map onto pipeline stages:

* audio: WAV I/O, resampling, signal profiles
* vad: amplitude gating and parametric segment VAD
* augment: white noise, silence, gain, and dataset-level recipes
* textfilter: parallel-corpus filtering with attrition reports
* langid: bundled character n-gram language classifier
* synth: two-voice TTS synthesis and forward MT over client contracts
* clients: HTTP-JSON client contracts plus deterministic offline mocks
* manifest: JSONL manifests, duration statistics, recipe composition
* metrics: BLEU, chrF++, WER, embedding-cosine similarity
* plan: training-experiment arithmetic and checkpoint selection
* cli: the `corvox` command
"""

__version__ = "0.1.0"
