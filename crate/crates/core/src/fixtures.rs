//! Shared concrete networks, signatures, and protocols used across tests,
//! shipped derivations, and the command-line examples.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::Signature;
use crate::multigraph::Multigraph;
use crate::protocol::{Protocol, Value, ValueTuple};

/// The two-stage relay network: a secure channel `m` into an encrypt/decrypt
/// pair `k`,`c`, a secure middle channel `m'`, a second pair `k'`,`c'`, and a
/// final secure channel `m''`. Its bridges are `m`, `m'`, `m''`.
///
/// ```text
/// p --m-- q ==k,c== u --m'-- s ==k',c'== t --m''-- v
/// ```
pub fn figure3_graph() -> Multigraph {
    Multigraph::new(
        ["p", "q", "u", "s", "t", "v"],
        [
            ("m", "p", "q"),
            ("k", "q", "u"),
            ("c", "q", "u"),
            ("m'", "u", "s"),
            ("k'", "s", "t"),
            ("c'", "s", "t"),
            ("m''", "t", "v"),
        ],
    )
    .expect("relay graph is well formed")
}

/// The relay network with one or two propositions per edge.
pub fn figure3_signature() -> Signature {
    Signature::new(
        figure3_graph(),
        [
            ("m", vec!["pm", "qm"]),
            ("k", vec!["pk"]),
            ("c", vec!["pc"]),
            ("m'", vec!["pm'"]),
            ("k'", vec!["pk'"]),
            ("c'", vec!["pc'"]),
            ("m''", vec!["pm''"]),
        ],
    )
    .expect("relay signature is well formed")
}

/// The three-channel line `a - b - c`.
pub fn line3_graph() -> Multigraph {
    Multigraph::new(
        ["w1", "w2", "w3", "w4"],
        [("a", "w1", "w2"), ("b", "w2", "w3"), ("c", "w3", "w4")],
    )
    .expect("line graph is well formed")
}

pub fn line3_signature() -> Signature {
    Signature::new(
        line3_graph(),
        [("a", vec!["pa"]), ("b", vec!["pb"]), ("c", vec!["pc"])],
    )
    .expect("line signature is well formed")
}

/// The five-channel line in the order `a - b - e - d - c`: channel `d`
/// separates `e` from `c`, and `b` separates `a` from `d`.
pub fn line5_graph() -> Multigraph {
    Multigraph::new(
        ["w1", "w2", "w3", "w4", "w5", "w6"],
        [
            ("a", "w1", "w2"),
            ("b", "w2", "w3"),
            ("e", "w3", "w4"),
            ("d", "w4", "w5"),
            ("c", "w5", "w6"),
        ],
    )
    .expect("line graph is well formed")
}

pub fn line5_signature() -> Signature {
    Signature::new(
        line5_graph(),
        [
            ("a", vec!["pa"]),
            ("b", vec!["pb"]),
            ("c", vec!["pc"]),
            ("d", vec!["pd"]),
            ("e", vec!["pe"]),
        ],
    )
    .expect("line signature is well formed")
}

/// The one-stage relay network of the one-time-pad protocol: message `m` in,
/// key `k` and ciphertext `c` in parallel, recovered message `m'` out.
pub fn p1_graph() -> Multigraph {
    Multigraph::new(
        ["p", "q", "u", "v"],
        [
            ("m", "p", "q"),
            ("k", "q", "u"),
            ("c", "q", "u"),
            ("m'", "u", "v"),
        ],
    )
    .expect("relay graph is well formed")
}

/// All bit strings of the given width, in numeric order.
pub fn bitstrings(bits: usize) -> Vec<String> {
    (0..(1usize << bits))
        .map(|n| format!("{n:0width$b}", width = bits))
        .collect()
}

fn xor(a: &str, b: &str) -> String {
    a.bytes()
        .zip(b.bytes())
        .map(|(x, y)| if x == y { '0' } else { '1' })
        .collect()
}

/// Hamming distance between two equal-length bit strings.
pub fn hamming(a: &str, b: &str) -> usize {
    a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count()
}

/// The signature of the one-stage relay with one equality proposition
/// `mp_<w>` on channel `m'` per value `w`.
pub fn p1_signature(bits: usize) -> Signature {
    let props: Vec<String> = bitstrings(bits).iter().map(|w| format!("mp_{w}")).collect();
    Signature::new(
        p1_graph(),
        [
            ("m", Vec::new()),
            ("k", Vec::new()),
            ("c", Vec::new()),
            ("m'", props),
        ],
    )
    .expect("relay signature is well formed")
}

fn relay_protocol(bits: usize, max_err_per_stage: usize) -> Protocol {
    let sig = p1_signature(bits);
    let values: Vec<Value> = bitstrings(bits).into_iter().map(Value).collect();
    let domains: BTreeMap<_, _> = ["m", "k", "c", "m'"]
        .into_iter()
        .map(|e| (e.into(), values.clone()))
        .collect();

    // q enforces h(c, m xor k) <= max_err, u enforces h(m', c xor k) <= max_err.
    let stage = |x_edge: &str, y_edge: &str, out_edge: &str| -> BTreeSet<ValueTuple> {
        let mut tuples = BTreeSet::new();
        for x in bitstrings(bits) {
            for y in bitstrings(bits) {
                let exact = xor(&x, &y);
                for out in bitstrings(bits) {
                    if hamming(&out, &exact) <= max_err_per_stage {
                        tuples.insert(ValueTuple::from([
                            (x_edge.into(), Value(x.clone())),
                            (y_edge.into(), Value(y.clone())),
                            (out_edge.into(), Value(out.clone())),
                        ]));
                    }
                }
            }
        }
        tuples
    };
    let locals = BTreeMap::from([
        ("q".into(), stage("m", "k", "c")),
        ("u".into(), stage("c", "k", "m'")),
    ]);

    let valuation: BTreeMap<_, _> = bitstrings(bits)
        .into_iter()
        .map(|w| (format!("mp_{w}").into(), BTreeSet::from([Value(w)])))
        .collect();

    Protocol::new(sig, domains, locals, valuation).expect("relay protocol is well formed")
}

/// The exact one-time-pad protocol: `c = m xor k` and `m' = c xor k`.
/// With 1-bit strings it has exactly 4 runs.
pub fn p1_protocol(bits: usize) -> Protocol {
    relay_protocol(bits, 0)
}

/// The noisy variant: at most one bit error per stage. With 4-bit strings it
/// has 6400 runs.
pub fn p2_protocol(bits: usize) -> Protocol {
    relay_protocol(bits, 1)
}
