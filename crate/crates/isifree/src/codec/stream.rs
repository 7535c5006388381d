//! Streaming encoder and decoder state machines, plus the text container
//! formats for bit and symbol streams.
//!
//! The encoder parses the input bit stream with the per-state full
//! prefix-free code and emits the mapped symbol strings; a trailing partial
//! codeword is completed with zero bits, and the pad count is reported so
//! the receiver can truncate. The decoder buffers at most `depth + memory`
//! symbols: entries span at most `depth` symbols, so a unique match always
//! fires within the buffer bound.

use crate::error::{Error, Result};
use crate::graph::{format_symbols, Symbol};

use super::ModulationCode;

/// Result of encoding a bit stream.
#[derive(Debug, Clone)]
pub struct EncodeOutput {
    pub symbols: Vec<Symbol>,
    /// Zero bits appended to complete the final codeword.
    pub padded_bits: usize,
    pub final_state: usize,
}

/// Incremental encoder: feed bits, collect symbols.
#[derive(Debug)]
pub struct Encoder<'a> {
    code: &'a ModulationCode,
    state: usize,
    pending: Vec<bool>,
    /// Bits consumed so far (excluding padding).
    pub bits_consumed: usize,
    /// Symbols emitted so far.
    pub symbols_emitted: usize,
}

impl<'a> Encoder<'a> {
    pub fn new(code: &'a ModulationCode) -> Encoder<'a> {
        Encoder {
            code,
            state: code.start,
            pending: Vec::new(),
            bits_consumed: 0,
            symbols_emitted: 0,
        }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    /// Takes any forced zero-bit moves, then matches `bit` against the
    /// current state's codebook, appending emitted symbols to `out`.
    pub fn push_bit(&mut self, bit: bool, out: &mut Vec<Symbol>) -> Result<()> {
        self.take_forced_moves(out)?;
        self.pending.push(bit);
        self.bits_consumed += 1;
        self.flush_pending(out)
    }

    fn take_forced_moves(&mut self, out: &mut Vec<Symbol>) -> Result<()> {
        let mut steps = 0;
        while self.pending.is_empty() {
            let entries = &self.code.states[self.state].entries;
            if entries.len() == 1 && entries[0].bits.is_empty() {
                out.extend_from_slice(&entries[0].symbols);
                self.symbols_emitted += entries[0].symbols.len();
                self.state = entries[0].next;
                steps += 1;
                if steps > self.code.states.len() {
                    return Err(Error::MalformedCode {
                        state: self.code.states[self.state].window.to_string(),
                    });
                }
            } else {
                break;
            }
        }
        Ok(())
    }

    fn flush_pending(&mut self, out: &mut Vec<Symbol>) -> Result<()> {
        let entries = &self.code.states[self.state].entries;
        let mut any_prefix = false;
        for e in entries {
            if e.bits.len() >= self.pending.len() && e.bits[..self.pending.len()] == self.pending[..] {
                any_prefix = true;
                if e.bits.len() == self.pending.len() {
                    out.extend_from_slice(&e.symbols);
                    self.symbols_emitted += e.symbols.len();
                    self.state = e.next;
                    self.pending.clear();
                    return Ok(());
                }
            }
        }
        if !any_prefix {
            return Err(Error::MalformedCode {
                state: self.code.states[self.state].window.to_string(),
            });
        }
        Ok(())
    }

    /// Completes a trailing partial codeword with zero bits. Returns the
    /// number of pad bits used.
    pub fn finish(&mut self, out: &mut Vec<Symbol>) -> Result<usize> {
        let mut pads = 0;
        while !self.pending.is_empty() {
            self.pending.push(false);
            pads += 1;
            self.flush_pending(out)?;
            if pads > self.code.max_bit_len() {
                return Err(Error::MalformedCode {
                    state: self.code.states[self.state].window.to_string(),
                });
            }
        }
        Ok(pads)
    }
}

/// Encodes a bit stream from the code's start state.
pub fn encode(code: &ModulationCode, bits: &[bool]) -> Result<EncodeOutput> {
    let mut encoder = Encoder::new(code);
    let mut symbols = Vec::with_capacity(bits.len());
    for &bit in bits {
        encoder.push_bit(bit, &mut symbols)?;
    }
    let padded_bits = encoder.finish(&mut symbols)?;
    Ok(EncodeOutput {
        symbols,
        padded_bits,
        final_state: encoder.state(),
    })
}

/// Incremental decoder: feed symbols, collect bits. Buffers at most
/// `depth + memory` symbols.
#[derive(Debug)]
pub struct Decoder<'a> {
    code: &'a ModulationCode,
    state: usize,
    buffer: Vec<Symbol>,
    buffer_limit: usize,
    /// Largest buffer occupancy observed.
    pub peak_buffer: usize,
    /// Symbols consumed so far.
    pub symbols_consumed: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(code: &'a ModulationCode) -> Decoder<'a> {
        Decoder {
            code,
            state: code.start,
            buffer: Vec::new(),
            buffer_limit: code.depth + code.spec.memory,
            peak_buffer: 0,
            symbols_consumed: 0,
        }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    /// Matches the buffered symbols against the current codebook, emitting
    /// decoded bits into `out`.
    pub fn push_symbol(&mut self, symbol: Symbol, out: &mut Vec<bool>) -> Result<()> {
        self.buffer.push(symbol);
        self.symbols_consumed += 1;
        self.peak_buffer = self.peak_buffer.max(self.buffer.len());
        if self.buffer.len() > self.buffer_limit {
            return Err(Error::Desync {
                state: self.code.states[self.state].window.to_string(),
                detail: format!("buffer exceeded {} symbols", self.buffer_limit),
            });
        }
        let entries = &self.code.states[self.state].entries;
        let mut any_prefix = false;
        let mut matched: Option<usize> = None;
        for (i, e) in entries.iter().enumerate() {
            if e.symbols.len() >= self.buffer.len()
                && e.symbols[..self.buffer.len()] == self.buffer[..]
            {
                any_prefix = true;
                if e.symbols.len() == self.buffer.len() {
                    matched = Some(i);
                }
            }
        }
        if let Some(i) = matched {
            let e = &entries[i];
            out.extend_from_slice(&e.bits);
            self.state = e.next;
            self.buffer.clear();
            return Ok(());
        }
        if any_prefix {
            return Ok(()); // wait for more symbols
        }
        Err(Error::Desync {
            state: self.code.states[self.state].window.to_string(),
            detail: format!("no entry matches {}", format_symbols(&self.buffer)),
        })
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }
}

/// Decodes a symbol stream produced by [`encode`] with the same code,
/// truncating to the original `n_bits` (padding is dropped).
pub fn decode(code: &ModulationCode, symbols: &[Symbol], n_bits: usize) -> Result<Vec<bool>> {
    let mut decoder = Decoder::new(code);
    let mut bits = Vec::with_capacity(n_bits + 8);
    for &sym in symbols {
        decoder.push_symbol(sym, &mut bits)?;
    }
    if decoder.buffered() > 0 {
        return Err(Error::Desync {
            state: code.states[decoder.state()].window.to_string(),
            detail: "stream ended inside a codeword".into(),
        });
    }
    if bits.len() < n_bits {
        return Err(Error::Desync {
            state: code.states[decoder.state()].window.to_string(),
            detail: format!("stream carries {} bits, {} expected", bits.len(), n_bits),
        });
    }
    bits.truncate(n_bits);
    Ok(bits)
}

/// Renders the encoded-stream container: a header line `n_bits=<int>`
/// followed by the space-separated symbols.
pub fn format_stream(n_bits: usize, symbols: &[Symbol]) -> String {
    format!("n_bits={}\n{}\n", n_bits, format_symbols(symbols))
}

/// Parses the encoded-stream container.
pub fn parse_stream(text: &str) -> Result<(usize, Vec<Symbol>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ParseInput("empty stream file".into()))?;
    let n_bits = header
        .strip_prefix("n_bits=")
        .and_then(|v| v.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::ParseInput(format!("bad stream header {header:?}")))?;
    let rest: String = lines.collect::<Vec<_>>().join(" ");
    let symbols = crate::graph::parse_symbols(&rest)?;
    Ok((n_bits, symbols))
}

/// Parses a text of `0`/`1` characters (whitespace ignored) into bits.
pub fn parse_bits(text: &str) -> Result<Vec<bool>> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::ParseInput(format!("invalid bit character {other:?}"))),
        })
        .collect()
}

/// Renders bits as a `0`/`1` string.
pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::mcsk_code;
    use crate::graph::ChannelSpec;

    #[test]
    fn baseline_alternates_molecules_across_silence() {
        let code = mcsk_code(ChannelSpec::new(1, 2).unwrap()).unwrap();
        let out = encode(&code, &parse_bits("101").unwrap()).unwrap();
        assert_eq!(format_symbols(&out.symbols), "M1 - M2");
        assert_eq!(out.padded_bits, 0);

        let out = encode(&code, &parse_bits("000").unwrap()).unwrap();
        assert_eq!(format_symbols(&out.symbols), "- - -");

        let back = decode(&code, &out.symbols, 3).unwrap();
        assert_eq!(format_bits(&back), "000");
    }

    #[test]
    fn empty_input_encodes_to_nothing() {
        let code = mcsk_code(ChannelSpec::new(1, 2).unwrap()).unwrap();
        let out = encode(&code, &[]).unwrap();
        assert!(out.symbols.is_empty());
        assert_eq!(out.padded_bits, 0);
    }

    #[test]
    fn stream_container_round_trip() {
        let symbols = crate::graph::parse_symbols("M1 - M2 M1").unwrap();
        let text = format_stream(7, &symbols);
        let (n, parsed) = parse_stream(&text).unwrap();
        assert_eq!(n, 7);
        assert_eq!(parsed, symbols);
        assert!(parse_stream("garbage\nM1").is_err());
    }

    #[test]
    fn bit_text_round_trip() {
        let bits = parse_bits("0110 1\n0").unwrap();
        assert_eq!(format_bits(&bits), "011010");
        assert!(parse_bits("012").is_err());
    }
}
