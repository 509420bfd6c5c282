//! Maps by name, for the command line.

use super::*;
use crate::construction::{build_lambda_map, build_psi, build_r, SqueezeParams};

/// Registry entries with a short description; `<..>` marks parameters.
pub fn registry_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("hopf", "Hopf map S³ → S²"),
        ("hopf∘rev", "Hopf map precomposed with an orientation-reversing isometry (alias hopf-rev)"),
        ("i-s2", "inclusion S² → R³"),
        ("i∘hopf", "Hopf map followed by the inclusion (alias i-hopf)"),
        ("i∘hopf∘rev", "i∘hopf precomposed with an orientation-reversing isometry (alias i-hopf-rev)"),
        ("id-s2", "identity of S²"),
        ("id-s3", "identity of S³"),
        ("const:<v1,v2,v3>", "constant map S³ → R³"),
        ("cone:hopf", "cone extension B⁴ → B³ of the Hopf map"),
        ("line-null:i∘hopf", "straight-line null-homotopy of i∘hopf on S³×[0,1]"),
        ("time-const:i∘hopf", "i∘hopf, constant in time on S³×[0,1]"),
        ("rot:<θ>", "i(R(θt)·hopf(x)) on S³×[0,1]"),
        ("Lambda:<r>", "radial map Λ of B³"),
        ("R:<δ>,<W>", "lattice squeeze map of R³"),
        ("psi:<δ>,<W>,<r>", "squeeze map Ψ of B³"),
    ]
}

fn numbers(spec: &str, name: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| Error::parameter("map", format!("cannot parse `{s}` in map name `{name}`")))
        })
        .collect()
}

fn unknown(name: &str) -> Error {
    Error::UnknownMap {
        name: name.to_string(),
        known: registry_names().iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
    }
}

fn i_hopf() -> AnalyticMap {
    compose(&inclusion_s2(), &hopf_map()).expect("S² ⊂ S²").renamed("i∘hopf")
}

/// Looks up a registry map by name.
pub fn lookup(name: &str) -> Result<AnalyticMap> {
    let canonical = name.replace("i-hopf", "i∘hopf").replace("hopf-rev", "hopf∘rev");
    let map = match canonical.as_str() {
        "hopf" => hopf_map(),
        "hopf∘rev" => compose(&hopf_map(), &orientation_reversal())?.renamed("hopf∘rev"),
        "i-s2" => inclusion_s2(),
        "i∘hopf" => i_hopf(),
        "i∘hopf∘rev" => compose(&i_hopf(), &orientation_reversal())?.renamed("i∘hopf∘rev"),
        "id-s2" => identity(Space::Sphere(2)),
        "id-s3" => identity(Space::Sphere(3)),
        "cone:hopf" => cone_extension(&hopf_map())?,
        "line-null:i∘hopf" => straight_line_null_homotopy(&i_hopf())?,
        "time-const:i∘hopf" => time_constant(&i_hopf())?,
        other => {
            let (prefix, args) = other.split_once(':').ok_or_else(|| unknown(name))?;
            match prefix {
                "const" => {
                    let v = numbers(args, name)?;
                    if v.len() != 3 {
                        return Err(Error::parameter("map", "const:<v> needs three coordinates"));
                    }
                    constant_map(Space::Sphere(3), v)
                }
                "rot" => {
                    let v = numbers(args, name)?;
                    if v.len() != 1 {
                        return Err(Error::parameter("map", "rot:<θ> needs one angle"));
                    }
                    rotation_path(&hopf_map(), v[0])?.renamed(name)
                }
                "Lambda" => {
                    let v = numbers(args, name)?;
                    if v.len() != 1 {
                        return Err(Error::parameter("map", "Lambda:<r> needs one radius"));
                    }
                    build_lambda_map(v[0])?
                }
                "R" => {
                    let v = numbers(args, name)?;
                    if v.len() != 2 {
                        return Err(Error::parameter("map", "R:<δ>,<W> needs two numbers"));
                    }
                    build_r(&SqueezeParams::new(v[0], v[1], crate::construction::DEFAULT_R)?)?
                }
                "psi" => {
                    let v = numbers(args, name)?;
                    if v.len() != 3 {
                        return Err(Error::parameter("map", "psi:<δ>,<W>,<r> needs three numbers"));
                    }
                    build_psi(&SqueezeParams::new(v[0], v[1], v[2])?)?
                }
                _ => return Err(unknown(name)),
            }
        }
    };
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_names_list_the_registry() {
        match lookup("nope") {
            Err(Error::UnknownMap { known, .. }) => assert!(known.contains("hopf")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn aliases_resolve() {
        assert_eq!(lookup("i-hopf").unwrap().name(), "i∘hopf");
        assert_eq!(lookup("line-null:i-hopf").unwrap().domain(), &Space::product(Space::Sphere(3)));
        assert!(lookup("const:1,2,3").unwrap().eval(&[1.0, 0.0, 0.0, 0.0]).unwrap() == vec![1.0, 2.0, 3.0]);
    }
}
