//! Bit-parallel simulation: every net holds a 64-bit word, one operand pair
//! (or one clock cycle) per lane.

use super::{AxoConfig, CellKind, Family, OperatorNetlist};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
enum Op {
    Lut {
        inputs: [u32; 6],
        /// Algebraic normal form: XOR of AND-monomials over input masks.
        terms: Vec<u8>,
        aux_terms: Vec<u8>,
        out: u32,
        aux: u32,
        config: u32,
    },
    Mux {
        sel: u32,
        data: u32,
        carry: u32,
        out: u32,
    },
    Xor {
        a: u32,
        b: u32,
        out: u32,
    },
}

/// Möbius transform of a truth table over `k` inputs.
fn anf_terms(init: u64, k: usize) -> Vec<u8> {
    let size = 1usize << k;
    let mut coef: Vec<u8> = (0..size).map(|m| ((init >> m) & 1) as u8).collect();
    for j in 0..k {
        for m in 0..size {
            if m & (1 << j) != 0 {
                coef[m] ^= coef[m ^ (1 << j)];
            }
        }
    }
    (0..size).filter(|&m| coef[m] == 1).map(|m| m as u8).collect()
}

#[inline]
fn eval_anf(terms: &[u8], inputs: &[u32; 6], values: &[u64]) -> u64 {
    let mut out = 0u64;
    for &m in terms {
        let mut t = !0u64;
        let mut rest = m;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            t &= values[inputs[j] as usize];
            rest &= rest - 1;
        }
        out ^= t;
    }
    out
}

/// Reusable simulation state for one netlist.
///
/// Not shared between threads; create one per worker. The netlist itself is
/// immutable and may be shared freely.
pub struct Simulator<'a> {
    netlist: &'a OperatorNetlist,
    ops: Vec<Op>,
    values: Vec<u64>,
}

impl<'a> Simulator<'a> {
    pub fn new(netlist: &'a OperatorNetlist) -> Self {
        let ops = netlist
            .cells()
            .iter()
            .map(|c| match &c.kind {
                CellKind::Lut { init, aux_init } => {
                    let mut inputs = [0u32; 6];
                    for (slot, n) in inputs.iter_mut().zip(&c.inputs) {
                        *slot = n.0;
                    }
                    let k = c.inputs.len();
                    Op::Lut {
                        inputs,
                        terms: anf_terms(*init, k),
                        aux_terms: aux_init.map(|a| anf_terms(a, k)).unwrap_or_default(),
                        out: c.output.0,
                        aux: c.aux_output.map_or(NONE, |n| n.0),
                        config: c.config_index.map_or(NONE, |i| i as u32),
                    }
                }
                CellKind::CarryMux => {
                    Op::Mux { sel: c.inputs[0].0, data: c.inputs[1].0, carry: c.inputs[2].0, out: c.output.0 }
                }
                CellKind::CarryXor => Op::Xor { a: c.inputs[0].0, b: c.inputs[1].0, out: c.output.0 },
            })
            .collect();
        let mut values = vec![0u64; netlist.net_count()];
        values[1] = !0;
        Self { netlist, ops, values }
    }

    pub fn netlist(&self) -> &OperatorNetlist {
        self.netlist
    }

    /// Current word of every net.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Sets operand words directly: `a_words[j]` holds bit `j` of `a` for all lanes.
    pub fn load_words(&mut self, a_words: &[u64], b_words: &[u64]) {
        for (n, &w) in self.netlist.a_inputs().iter().zip(a_words) {
            self.values[n.index()] = w;
        }
        for (n, &w) in self.netlist.b_inputs().iter().zip(b_words) {
            self.values[n.index()] = w;
        }
    }

    /// Loads up to 64 operand pairs, one per lane. Operands are taken modulo
    /// 2^N (two's complement for signed operators).
    pub fn load_pairs(&mut self, pairs: &[(i64, i64)]) {
        assert!(pairs.len() <= 64);
        let width = self.netlist.kind().width();
        let mut a_words = [0u64; 64];
        let mut b_words = [0u64; 64];
        for (lane, &(a, b)) in pairs.iter().enumerate() {
            let (a, b) = (a as u64, b as u64);
            for j in 0..width {
                a_words[j] |= ((a >> j) & 1) << lane;
                b_words[j] |= ((b >> j) & 1) << lane;
            }
        }
        self.load_words(&a_words[..width], &b_words[..width]);
    }

    /// Propagates the loaded inputs through the netlist under `config`.
    pub fn step(&mut self, config: &AxoConfig) {
        let cfg = config.to_uint();
        let values = &mut self.values;
        for op in &self.ops {
            match op {
                Op::Lut { inputs, terms, aux_terms, out, aux, config } => {
                    let removed = *config != NONE && (cfg >> *config) & 1 == 0;
                    let (o, x) = if removed {
                        (0, 0)
                    } else {
                        (eval_anf(terms, inputs, values), eval_anf(aux_terms, inputs, values))
                    };
                    values[*out as usize] = o;
                    if *aux != NONE {
                        values[*aux as usize] = x;
                    }
                }
                Op::Mux { sel, data, carry, out } => {
                    let s = values[*sel as usize];
                    values[*out as usize] = (s & values[*carry as usize]) | (!s & values[*data as usize]);
                }
                Op::Xor { a, b, out } => {
                    values[*out as usize] = values[*a as usize] ^ values[*b as usize];
                }
            }
        }
    }

    /// Reads the result of the first `out.len()` lanes.
    pub fn decode_into(&self, out: &mut [i64]) {
        let outputs = self.netlist.outputs();
        let lanes = out.len();
        let mut raw = [0u64; 64];
        for (k, n) in outputs.iter().enumerate() {
            let w = self.values[n.index()];
            for (lane, r) in raw.iter_mut().enumerate().take(lanes) {
                *r |= ((w >> lane) & 1) << k;
            }
        }
        let bits = outputs.len();
        let signed = self.netlist.kind().family() == Family::SignedMultiplier;
        for (o, &r) in out.iter_mut().zip(&raw) {
            *o = if signed && (r >> (bits - 1)) & 1 == 1 { r as i64 - (1i64 << bits) } else { r as i64 };
        }
    }

    /// Evaluates any number of operand pairs; `out` must match `pairs` in length.
    pub fn evaluate_into(&mut self, config: &AxoConfig, pairs: &[(i64, i64)], out: &mut [i64]) {
        assert_eq!(pairs.len(), out.len());
        for (chunk, dst) in pairs.chunks(64).zip(out.chunks_mut(64)) {
            self.load_pairs(chunk);
            self.step(config);
            self.decode_into(dst);
        }
    }
}
