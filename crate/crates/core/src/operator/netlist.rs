//! Gate-level netlists for accurate operators.
//!
//! Every removable LUT is a fractured two-output LUT in front of one carry
//! stage: the main output drives the propagate signal `p = x ^ y` and the
//! auxiliary output drives the carry-mux data input with `x`. The carry
//! stage computes `c' = p ? c : x` and `s = p ^ c`. Removing the LUT ties
//! both of its outputs to 0.

use std::fmt::Write as _;

use super::{AxoConfig, Family, OperatorKind};
use crate::error::{Error, Result};

/// A signal in the netlist. Nets 0 and 1 are the constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Net(pub u32);

impl Net {
    pub const ZERO: Net = Net(0);
    pub const ONE: Net = Net(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_const(self) -> bool {
        self.0 < 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellKind {
    /// Truth tables index bit `m` by `sum(input_j << j)`.
    Lut { init: u64, aux_init: Option<u64> },
    /// Inputs `[select, data, carry_in]`; output `select ? carry_in : data`.
    CarryMux,
    /// Inputs `[a, b]`; output `a ^ b`.
    CarryXor,
}

impl CellKind {
    pub fn name(&self) -> &'static str {
        match self {
            CellKind::Lut { .. } => "lut",
            CellKind::CarryMux => "mux",
            CellKind::CarryXor => "xor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetlistCell {
    pub id: usize,
    pub kind: CellKind,
    pub inputs: Vec<Net>,
    pub output: Net,
    /// Second LUT output (O5), driving a carry-mux data input.
    pub aux_output: Option<Net>,
    pub removable: bool,
    pub config_index: Option<usize>,
}

impl NetlistCell {
    pub fn is_lut(&self) -> bool {
        matches!(self.kind, CellKind::Lut { .. })
    }

    /// Whether the cell is switched off under `config`.
    pub fn is_removed(&self, config: &AxoConfig) -> bool {
        self.config_index.is_some_and(|i| !config.bit(i))
    }

    pub fn outputs(&self) -> impl Iterator<Item = Net> + '_ {
        std::iter::once(self.output).chain(self.aux_output)
    }
}

/// A topologically ordered circuit for an accurate operator.
#[derive(Debug, Clone)]
pub struct OperatorNetlist {
    kind: OperatorKind,
    cells: Vec<NetlistCell>,
    a_inputs: Vec<Net>,
    b_inputs: Vec<Net>,
    outputs: Vec<Net>,
    net_count: usize,
    /// Cell id of each removable LUT, indexed by configuration bit.
    removable: Vec<usize>,
}

impl OperatorNetlist {
    /// Builds the accurate netlist of `kind`.
    pub fn build(kind: OperatorKind) -> Self {
        let mut b = Builder::new(kind.width());
        let outputs = match kind.family() {
            Family::UnsignedAdder => build_adder(&mut b, kind.width()),
            Family::SignedMultiplier => build_multiplier(&mut b, kind.width()),
        };
        let mut removable = vec![usize::MAX; kind.config_length()];
        for cell in &b.cells {
            if let Some(i) = cell.config_index {
                removable[i] = cell.id;
            }
        }
        debug_assert!(removable.iter().all(|&c| c != usize::MAX));
        Self {
            kind,
            cells: b.cells,
            a_inputs: b.a_inputs,
            b_inputs: b.b_inputs,
            outputs,
            net_count: b.next_net as usize,
            removable,
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn cells(&self) -> &[NetlistCell] {
        &self.cells
    }

    pub fn a_inputs(&self) -> &[Net] {
        &self.a_inputs
    }

    pub fn b_inputs(&self) -> &[Net] {
        &self.b_inputs
    }

    /// Result bits, least significant first.
    pub fn outputs(&self) -> &[Net] {
        &self.outputs
    }

    pub fn net_count(&self) -> usize {
        self.net_count
    }

    /// Cell id of the LUT controlled by configuration bit `index`.
    pub fn removable_cell(&self, index: usize) -> usize {
        self.removable[index]
    }

    pub fn removable_count(&self) -> usize {
        self.removable.len()
    }

    pub fn check_config(&self, config: &AxoConfig) -> Result<()> {
        let expected = self.kind.config_length();
        if config.len() != expected {
            return Err(Error::ConfigLength { expected, got: config.len() });
        }
        Ok(())
    }

    /// Evaluates one operand pair under `config`.
    pub fn evaluate(&self, config: &AxoConfig, a: i64, b: i64) -> Result<i64> {
        self.check_config(config)?;
        self.kind.check_operand(a)?;
        self.kind.check_operand(b)?;
        let mut sim = super::Simulator::new(self);
        let mut out = [0i64; 1];
        sim.evaluate_into(config, &[(a, b)], &mut out);
        Ok(out[0])
    }

    /// Value of every net for one operand pair, indexed by net.
    pub fn trace(&self, config: &AxoConfig, a: i64, b: i64) -> Result<Vec<bool>> {
        self.check_config(config)?;
        self.kind.check_operand(a)?;
        self.kind.check_operand(b)?;
        let mut sim = super::Simulator::new(self);
        sim.load_pairs(&[(a, b)]);
        sim.step(config);
        Ok(sim.values().iter().map(|w| w & 1 == 1).collect())
    }

    /// Cells transitively driven by `cell` (including itself), as a mask over cell ids.
    pub fn fanout_cone(&self, cell: usize) -> Vec<bool> {
        let mut net_in_cone = vec![false; self.net_count];
        let mut in_cone = vec![false; self.cells.len()];
        in_cone[cell] = true;
        for n in self.cells[cell].outputs() {
            net_in_cone[n.index()] = true;
        }
        for c in &self.cells[cell + 1..] {
            if c.inputs.iter().any(|n| net_in_cone[n.index()]) {
                in_cone[c.id] = true;
                for n in c.outputs() {
                    net_in_cone[n.index()] = true;
                }
            }
        }
        in_cone
    }

    /// Output bit positions reachable from `cell`.
    pub fn affected_outputs(&self, cell: usize) -> Vec<usize> {
        let cone = self.fanout_cone(cell);
        let mut driven = vec![false; self.net_count];
        for c in self.cells.iter().filter(|c| cone[c.id]) {
            for n in c.outputs() {
                driven[n.index()] = true;
            }
        }
        self.outputs.iter().enumerate().filter(|(_, n)| driven[n.index()]).map(|(i, _)| i).collect()
    }

    /// For each output bit, `Some(v)` if it is the constant `v` under
    /// `config` regardless of the operands, `None` otherwise.
    ///
    /// Under the all-zeros configuration the only constant-one outputs are
    /// produced by fixed (non-removable) logic, e.g. the multiplier's
    /// correction bits.
    pub fn constant_outputs(&self, config: &AxoConfig) -> Result<Vec<Option<bool>>> {
        self.check_config(config)?;
        let mut depends = vec![false; self.net_count];
        for n in self.a_inputs.iter().chain(&self.b_inputs) {
            depends[n.index()] = true;
        }
        for c in &self.cells {
            let d = !c.is_removed(config) && c.inputs.iter().any(|n| depends[n.index()]);
            for n in c.outputs() {
                depends[n.index()] = d;
            }
        }
        let (lo, _) = self.kind.operand_range();
        let values = self.trace(config, lo, lo)?;
        Ok(self.outputs.iter().map(|n| (!depends[n.index()]).then(|| values[n.index()])).collect())
    }

    /// Line-oriented dump: `id kind removable config_index inputs`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for c in &self.cells {
            let idx = c.config_index.map_or_else(|| "-".to_string(), |i| i.to_string());
            let inputs: Vec<String> = c.inputs.iter().map(|n| n.0.to_string()).collect();
            let _ = writeln!(s, "{} {} {} {} {}", c.id, c.kind.name(), c.removable as u8, idx, inputs.join(","));
        }
        s
    }
}

type TermFn = Box<dyn Fn(&[bool]) -> (bool, bool)>;

/// One bit position of a carry-chain row: LUT inputs plus the `(x, y)` pair
/// the LUT derives from them.
struct Position {
    inputs: Vec<Net>,
    terms: TermFn,
}

struct Builder {
    cells: Vec<NetlistCell>,
    a_inputs: Vec<Net>,
    b_inputs: Vec<Net>,
    next_net: u32,
}

impl Builder {
    fn new(width: usize) -> Self {
        let a_inputs = (0..width).map(|i| Net(2 + i as u32)).collect();
        let b_inputs = (0..width).map(|i| Net(2 + (width + i) as u32)).collect();
        Self { cells: Vec::new(), a_inputs, b_inputs, next_net: 2 + 2 * width as u32 }
    }

    fn net(&mut self) -> Net {
        let n = Net(self.next_net);
        self.next_net += 1;
        n
    }

    fn push(&mut self, kind: CellKind, inputs: Vec<Net>, aux: bool, config_index: Option<usize>) -> (Net, Option<Net>) {
        let output = self.net();
        let aux_output = aux.then(|| self.net());
        self.cells.push(NetlistCell {
            id: self.cells.len(),
            kind,
            inputs,
            output,
            aux_output,
            removable: config_index.is_some(),
            config_index,
        });
        (output, aux_output)
    }

    /// Carry-chain row summing the `(x, y)` terms of each position with
    /// `c_0 = 0`. Returns the sum bits and, if requested, the carry out.
    fn carry_row(&mut self, positions: Vec<Position>, first_config: Option<usize>, carry_out: bool) -> Vec<Net> {
        let n = positions.len();
        let mut carry = Net::ZERO;
        let mut sums = Vec::with_capacity(n + 1);
        for (t, pos) in positions.into_iter().enumerate() {
            let k = pos.inputs.len();
            assert!(k <= 6, "LUT with {k} inputs");
            let mut init = 0u64;
            let mut aux_init = 0u64;
            for m in 0..(1usize << k) {
                let v: Vec<bool> = (0..k).map(|j| (m >> j) & 1 == 1).collect();
                let (x, y) = (pos.terms)(&v);
                init |= ((x ^ y) as u64) << m;
                aux_init |= (x as u64) << m;
            }
            let (p, g) = self.push(
                CellKind::Lut { init, aux_init: Some(aux_init) },
                pos.inputs,
                true,
                first_config.map(|base| base + t),
            );
            let g = g.expect("aux output");
            let (s, _) = self.push(CellKind::CarryXor, vec![p, carry], false, None);
            sums.push(s);
            if t + 1 < n || carry_out {
                let (c, _) = self.push(CellKind::CarryMux, vec![p, g, carry], false, None);
                carry = c;
            }
        }
        if carry_out {
            sums.push(carry);
        }
        sums
    }

    /// Exact `acc + term` over equal-width vectors, dropping the carry out.
    /// Positions below the lowest non-zero bit of `term` pass through.
    fn exact_add(&mut self, acc: &[Net], term: &[Net]) -> Vec<Net> {
        debug_assert_eq!(acc.len(), term.len());
        let Some(start) = term.iter().position(|&n| n != Net::ZERO) else {
            return acc.to_vec();
        };
        let positions = (start..acc.len())
            .map(|t| Position { inputs: vec![acc[t], term[t]], terms: Box::new(|v: &[bool]| (v[0], v[1])) })
            .collect();
        let mut out = acc[..start].to_vec();
        out.extend(self.carry_row(positions, None, false));
        out
    }
}

fn build_adder(b: &mut Builder, width: usize) -> Vec<Net> {
    let positions = (0..width)
        .map(|i| Position { inputs: vec![b.a_inputs[i], b.b_inputs[i]], terms: Box::new(|v: &[bool]| (v[0], v[1])) })
        .collect();
    b.carry_row(positions, Some(0), true)
}

/// Baugh-Wooley partial product `a_j * b_i`, complemented when exactly one
/// of `i`, `j` is the sign position.
fn partial_product(i: usize, j: usize, width: usize, a_j: bool, b_i: bool) -> bool {
    let complement = (i == width - 1) != (j == width - 1);
    (a_j && b_i) != complement
}

fn build_multiplier(b: &mut Builder, width: usize) -> Vec<Net> {
    let out_width = 2 * width;
    let mut acc: Option<Vec<Net>> = None;
    for pair in 0..width / 2 {
        let (r0, r1) = (2 * pair, 2 * pair + 1);
        let positions = (0..=width)
            .map(|t| {
                let has_x = t < width;
                let has_y = t >= 1;
                let mut inputs = Vec::new();
                if has_x {
                    inputs.push(b.a_inputs[t]);
                    inputs.push(b.b_inputs[r0]);
                }
                if has_y {
                    inputs.push(b.a_inputs[t - 1]);
                    inputs.push(b.b_inputs[r1]);
                }
                let terms: TermFn = Box::new(move |v: &[bool]| {
                    let mut k = 0;
                    let x = if has_x {
                        k = 2;
                        partial_product(r0, t, width, v[0], v[1])
                    } else {
                        false
                    };
                    let y = has_y && partial_product(r1, t - 1, width, v[k], v[k + 1]);
                    (x, y)
                });
                Position { inputs, terms }
            })
            .collect();
        let row = b.carry_row(positions, Some(pair * (width + 1)), true);
        let mut term = vec![Net::ZERO; out_width];
        for (t, &n) in row.iter().enumerate() {
            if 2 * pair + t < out_width {
                term[2 * pair + t] = n;
            }
        }
        acc = Some(match acc {
            None => term,
            Some(prev) => b.exact_add(&prev, &term),
        });
    }
    let mut correction = vec![Net::ZERO; out_width];
    correction[width] = Net::ONE;
    correction[out_width - 1] = Net::ONE;
    let acc = acc.expect("at least one row pair");
    b.exact_add(&acc, &correction)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn removable_luts(n: &OperatorNetlist) -> usize {
        n.cells().iter().filter(|c| c.removable).count()
    }

    #[test]
    fn removable_lut_counts() {
        let a3 = OperatorNetlist::build(OperatorKind::adder(3).unwrap());
        assert_eq!(removable_luts(&a3), 3);
        let m4 = OperatorNetlist::build(OperatorKind::multiplier(4).unwrap());
        assert_eq!(removable_luts(&m4), 10);
        let m8 = OperatorNetlist::build(OperatorKind::multiplier(8).unwrap());
        assert_eq!(removable_luts(&m8), 36);
        // 4 rows of 9.
        for row in 0..4 {
            for t in 0..9 {
                let cell = &m8.cells()[m8.removable_cell(row * 9 + t)];
                assert!(cell.is_lut());
                assert_eq!(cell.config_index, Some(row * 9 + t));
            }
        }
    }

    #[test]
    fn config_indices_are_distinct_and_dense() {
        let m6 = OperatorNetlist::build(OperatorKind::multiplier(6).unwrap());
        let mut seen: Vec<usize> = m6.cells().iter().filter_map(|c| c.config_index).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..21).collect::<Vec<_>>());
    }

    #[test]
    fn cells_are_topologically_ordered() {
        for kind in [OperatorKind::adder(8).unwrap(), OperatorKind::multiplier(8).unwrap()] {
            let n = OperatorNetlist::build(kind);
            let mut defined = vec![false; n.net_count()];
            defined[0] = true;
            defined[1] = true;
            for i in n.a_inputs().iter().chain(n.b_inputs()) {
                defined[i.index()] = true;
            }
            for c in n.cells() {
                assert!(c.inputs.iter().all(|i| defined[i.index()]), "cell {} uses undefined net", c.id);
                for o in c.outputs() {
                    assert!(!defined[o.index()], "net {} driven twice", o.0);
                    defined[o.index()] = true;
                }
            }
            assert!(n.outputs().iter().all(|o| defined[o.index()]));
        }
    }

    #[test]
    fn dump_has_one_line_per_cell() {
        let n = OperatorNetlist::build(OperatorKind::adder(3).unwrap());
        let dump = n.dump();
        assert_eq!(dump.lines().count(), n.cells().len());
        assert!(dump.lines().next().unwrap().starts_with("0 lut 1 0 "));
    }
}
