use jetalg::corpus::builtin;

#[test]
fn builtin_verdicts_match_expected() {
    for entry in builtin() {
        let got = entry.evaluate().unwrap_or_else(|e| panic!("{}: {e}", entry.name));
        assert_eq!(got, entry.expected, "{}", entry.name);
    }
}

#[test]
fn builtin_chains_are_deterministic() {
    for entry in builtin() {
        let a = entry.hierarchy().unwrap();
        let b = entry.hierarchy().unwrap();
        assert_eq!(a.chain, b.chain, "{}", entry.name);
        assert_eq!(a.chain.len(), entry.steps + 1);
    }
}
