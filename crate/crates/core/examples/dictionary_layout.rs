//! Lists the candidate basis functions of a few dictionaries.

use netrecon::dictionary::{enumerate_basis, DictionarySpec, RationalMode};

fn show(title: &str, spec: &DictionarySpec) {
    let basis = enumerate_basis(spec);
    println!("{title}: {} columns", basis.len());
    let names: Vec<String> = basis.iter().map(|b| b.to_string()).collect();
    println!("  {}", names.join(", "));
}

fn main() {
    show("repressilator", &DictionarySpec::repressilator());
    show(
        "cubic monomials in 3 variables",
        &DictionarySpec {
            n_vars: 3,
            monomial_max_degree: Some(3),
            ..DictionarySpec::default()
        },
    );
    show(
        "activation expansion of x1 regulated by x2",
        &DictionarySpec {
            n_vars: 2,
            rational_mode: RationalMode::Activation,
            rational_exponents: vec![1, 2],
            regulators: Some(vec![1]),
            rational_target: Some(0),
            ..DictionarySpec::default()
        },
    );
}
