//! RIFF/WAVE reading and writing for 16-bit PCM and 32-bit IEEE float.
//!
//! Multichannel input is downmixed to mono by averaging channels. Output is
//! always mono with the canonical 44-byte header.

use std::fs;
use std::path::Path;

use ltrkit_core::AudioBuffer;

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codec {
    Pcm16,
    Float32,
}

impl Codec {
    fn tag(self) -> u16 {
        match self {
            Codec::Pcm16 => FORMAT_PCM,
            Codec::Float32 => FORMAT_IEEE_FLOAT,
        }
    }

    fn bytes_per_sample(self) -> usize {
        match self {
            Codec::Pcm16 => 2,
            Codec::Float32 => 4,
        }
    }
}

impl std::str::FromStr for Codec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pcm16" => Ok(Codec::Pcm16),
            "float32" => Ok(Codec::Float32),
            other => Err(format!("unknown codec {other:?} (expected pcm16 or float32)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed WAV: {0}")]
    Malformed(&'static str),
    #[error("unsupported codec: format tag {tag}, {bits} bits per sample")]
    UnsupportedCodec { tag: u16, bits: u16 },
    #[error("data chunk holds no samples")]
    EmptyData,
    #[error("refusing to write an empty buffer")]
    EmptyBuffer,
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

struct Format {
    codec: Codec,
    channels: usize,
    sample_rate: u32,
}

fn parse_fmt(chunk: &[u8]) -> Result<Format, WavError> {
    if chunk.len() < 16 {
        return Err(WavError::Malformed("fmt chunk shorter than 16 bytes"));
    }
    let tag = u16_at(chunk, 0);
    let channels = u16_at(chunk, 2);
    let sample_rate = u32_at(chunk, 4);
    let bits = u16_at(chunk, 14);
    let codec = match (tag, bits) {
        (FORMAT_PCM, 16) => Codec::Pcm16,
        (FORMAT_IEEE_FLOAT, 32) => Codec::Float32,
        _ => return Err(WavError::UnsupportedCodec { tag, bits }),
    };
    if channels == 0 {
        return Err(WavError::Malformed("zero channels"));
    }
    if sample_rate == 0 {
        return Err(WavError::Malformed("zero sample rate"));
    }
    Ok(Format {
        codec,
        channels: usize::from(channels),
        sample_rate,
    })
}

/// Decodes a complete WAV file image.
pub fn decode_wav(bytes: &[u8]) -> Result<(AudioBuffer, Codec), WavError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::Malformed("missing RIFF/WAVE header"));
    }
    let mut format = None;
    let mut data = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        let end = body
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or(WavError::Malformed("chunk runs past end of file"))?;
        match id {
            b"fmt " => format = Some(parse_fmt(&bytes[body..end])?),
            b"data" => data = Some(&bytes[body..end]),
            _ => {}
        }
        pos = end + (size & 1);
    }
    let format = format.ok_or(WavError::Malformed("no fmt chunk"))?;
    let data = data.ok_or(WavError::Malformed("no data chunk"))?;

    let frame_bytes = format.channels * format.codec.bytes_per_sample();
    let frames = data.len() / frame_bytes;
    if frames == 0 {
        return Err(WavError::EmptyData);
    }
    let samples = data[..frames * frame_bytes]
        .chunks_exact(frame_bytes)
        .map(|frame| downmix(frame, &format))
        .collect();
    let buffer = AudioBuffer::new(samples, format.sample_rate).map_err(|_| WavError::Malformed("zero sample rate"))?;
    Ok((buffer, format.codec))
}

fn downmix(frame: &[u8], format: &Format) -> f32 {
    match format.codec {
        Codec::Pcm16 => {
            let sum: f64 = frame
                .chunks_exact(2)
                .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]])))
                .sum();
            (sum / format.channels as f64 / 32768.0) as f32
        }
        Codec::Float32 => {
            let mut values = frame
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
            if format.channels == 1 {
                return values.next().unwrap_or(0.0);
            }
            (values.map(f64::from).sum::<f64>() / format.channels as f64) as f32
        }
    }
}

fn encode_pcm16(s: f32) -> i16 {
    if s.is_nan() {
        return 0;
    }
    (f64::from(s.clamp(-1.0, 1.0)) * 32768.0)
        .round()
        .clamp(-32768.0, 32767.0) as i16
}

/// Encodes a mono buffer with the canonical 44-byte header.
pub fn encode_wav(buffer: &AudioBuffer, codec: Codec) -> Result<Vec<u8>, WavError> {
    if buffer.is_empty() {
        return Err(WavError::EmptyBuffer);
    }
    let width = codec.bytes_per_sample();
    let data_len = buffer.len() * width;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&codec.tag().to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&buffer.sample_rate_hz().to_le_bytes());
    out.extend_from_slice(&(buffer.sample_rate_hz() * width as u32).to_le_bytes());
    out.extend_from_slice(&(width as u16).to_le_bytes());
    out.extend_from_slice(&(width as u16 * 8).to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in buffer.samples() {
        match codec {
            Codec::Pcm16 => out.extend_from_slice(&encode_pcm16(s).to_le_bytes()),
            Codec::Float32 => out.extend_from_slice(&s.to_le_bytes()),
        }
    }
    Ok(out)
}

pub fn read_wav_with_codec(path: impl AsRef<Path>) -> Result<(AudioBuffer, Codec), WavError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| WavError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_wav(&bytes)
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, WavError> {
    read_wav_with_codec(path).map(|(b, _)| b)
}

pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>, codec: Codec) -> Result<(), WavError> {
    let path = path.as_ref();
    let bytes = encode_wav(buffer, codec)?;
    fs::write(path, bytes).map_err(|source| WavError::Io {
        path: path.display().to_string(),
        source,
    })
}
