"""Exception hierarchy shared across the toolkit."""


class CorvoxError(Exception):
    """Base class for all toolkit errors."""


class AudioError(CorvoxError):
    """Base class for audio I/O problems."""


class AudioReadError(AudioError):
    """File is missing, unreadable, or not a RIFF/WAVE container."""


class UnsupportedCodecError(AudioError):
    """WAV container uses a codec other than 16-bit PCM or 32-bit float."""


class EmptyAudioError(AudioError):
    """Audio payload holds zero samples."""


class ManifestError(CorvoxError):
    """Manifest file is malformed or violates record invariants."""


class ClientError(CorvoxError):
    """A TTS/MT/embedding client failed past its retry budget."""


class ConfigError(CorvoxError):
    """Pipeline configuration is missing or invalid."""
