//! Text descriptors for base and extended distributions.
//!
//! ```text
//! descriptor := ident '(' [ arg { ',' arg } ] ')'
//! arg        := ident '=' ( number | descriptor )
//! ```
//!
//! Base families take numeric arguments (`weibull(shape=2,scale=1)`);
//! `lehmann1` / `lehmann2` take `base=<descriptor>` and `lambda=<number>`.
//! Whitespace between tokens is ignored. Errors report the byte offset and
//! the tokens that would have been accepted there.

use crate::base::{BaseDistribution, FamilyRegistry};
use crate::error::{Error, ParseError, Result};
use crate::lehmann::{ExtendedDistribution, Kind};

/// A parsed descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum Descriptor {
    Base(BaseDistribution),
    Extended(ExtendedDistribution),
}

impl Descriptor {
    /// Views a base law as the identity extension `λ = 1` of `kind`.
    pub fn into_extended(self, kind: Kind) -> ExtendedDistribution {
        match self {
            Descriptor::Extended(g) => g,
            Descriptor::Base(base) => {
                ExtendedDistribution::new(base, 1.0, kind).expect("unit exponent is valid")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Call(Call),
}

#[derive(Debug, Clone, PartialEq)]
struct Call {
    name: String,
    pos: usize,
    args: Vec<Arg>,
}

#[derive(Debug, Clone, PartialEq)]
struct Arg {
    key: String,
    key_pos: usize,
    value_pos: usize,
    value: Value,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn describe(rest: &str) -> String {
    match rest.chars().next() {
        None => "end of input".to_owned(),
        Some(c) => format!("`{c}`"),
    }
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            position: self.pos,
            expected: expected.iter().map(|s| (*s).to_owned()).collect(),
            found: describe(self.rest()),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, label: &str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn ident(&mut self) -> Result<(String, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .char_indices()
            .find(|&(i, c)| {
                !(c == '_' || c.is_ascii_alphabetic() || (i > 0 && c.is_ascii_digit()))
            })
            .map_or(self.rest().len(), |(i, _)| i);
        if len == 0 {
            return Err(self.error(&["identifier"]));
        }
        self.pos += len;
        Ok((self.src[start..self.pos].to_owned(), start))
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
            .unwrap_or(self.rest().len());
        let text = &self.rest()[..len];
        match text.parse::<f64>() {
            Ok(v) if len > 0 => {
                self.pos += len;
                Ok(v)
            }
            _ => Err(self.error(&["number"])),
        }
    }

    fn call(&mut self) -> Result<Call, ParseError> {
        let (name, pos) = self.ident()?;
        self.expect('(', "`(`")?;
        let mut args = Vec::new();
        if !self.eat(')') {
            loop {
                let (key, key_pos) = self.ident().map_err(|mut e| {
                    if args.is_empty() {
                        e.expected.push("`)`".to_owned());
                    }
                    e
                })?;
                self.expect('=', "`=`")?;
                self.skip_ws();
                let value_pos = self.pos;
                let value = if self
                    .rest()
                    .starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
                {
                    Value::Call(self.call()?)
                } else {
                    Value::Number(self.number().map_err(|mut e| {
                        e.expected.push("descriptor".to_owned());
                        e
                    })?)
                };
                args.push(Arg {
                    key,
                    key_pos,
                    value_pos,
                    value,
                });
                if self.eat(')') {
                    break;
                }
                if !self.eat(',') {
                    return Err(self.error(&["`,`", "`)`"]));
                }
            }
        }
        Ok(Call { name, pos, args })
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }
}

fn semantic(position: usize, expected: Vec<String>, found: String) -> Error {
    Error::Parse(ParseError {
        position,
        expected,
        found,
    })
}

fn resolve(call: &Call, registry: &FamilyRegistry) -> Result<Descriptor> {
    if let Some(kind) = Kind::from_keyword(&call.name) {
        return resolve_extended(call, kind, registry).map(Descriptor::Extended);
    }
    resolve_base(call, registry).map(Descriptor::Base)
}

fn resolve_base(call: &Call, registry: &FamilyRegistry) -> Result<BaseDistribution> {
    let family = registry.get(&call.name).ok_or_else(|| {
        let mut expected: Vec<String> = registry.names().map(str::to_owned).collect();
        expected.extend(["lehmann1".to_owned(), "lehmann2".to_owned()]);
        semantic(call.pos, expected, format!("`{}`", call.name))
    })?;
    let names = family.param_names();
    let mut theta = vec![f64::NAN; names.len()];
    for arg in &call.args {
        let Some(slot) = names.iter().position(|n| *n == arg.key) else {
            return Err(semantic(
                arg.key_pos,
                names.iter().map(|n| format!("`{n}`")).collect(),
                format!("`{}`", arg.key),
            ));
        };
        if !theta[slot].is_nan() {
            return Err(semantic(
                arg.key_pos,
                vec!["a parameter not already given".to_owned()],
                format!("duplicate `{}`", arg.key),
            ));
        }
        match &arg.value {
            Value::Number(v) => theta[slot] = *v,
            Value::Call(c) => {
                return Err(semantic(
                    arg.value_pos,
                    vec!["number".to_owned()],
                    format!("descriptor `{}`", c.name),
                ))
            }
        }
    }
    if let Some(missing) = names.iter().zip(&theta).find(|(_, v)| v.is_nan()) {
        return Err(semantic(
            call.pos,
            vec![format!("`{}`", missing.0)],
            format!("`{}` without it", call.name),
        ));
    }
    family.build(&theta)
}

fn resolve_extended(call: &Call, kind: Kind, registry: &FamilyRegistry) -> Result<ExtendedDistribution> {
    let mut base = None;
    let mut lambda = None;
    for arg in &call.args {
        match (arg.key.as_str(), &arg.value) {
            ("base", Value::Call(c)) if base.is_none() => base = Some(resolve_base(c, registry)?),
            ("base", Value::Number(_)) => {
                return Err(semantic(
                    arg.value_pos,
                    vec!["base descriptor".to_owned()],
                    "number".to_owned(),
                ))
            }
            ("lambda", Value::Number(v)) if lambda.is_none() => lambda = Some(*v),
            ("lambda", Value::Call(_)) => {
                return Err(semantic(
                    arg.value_pos,
                    vec!["number".to_owned()],
                    "descriptor".to_owned(),
                ))
            }
            (key, _) => {
                return Err(semantic(
                    arg.key_pos,
                    vec!["`base`".to_owned(), "`lambda`".to_owned()],
                    format!("`{key}`"),
                ))
            }
        }
    }
    match (base, lambda) {
        (Some(base), Some(lambda)) => ExtendedDistribution::new(base, lambda, kind),
        (None, _) => Err(semantic(call.pos, vec!["`base`".to_owned()], "no base".to_owned())),
        (_, None) => Err(semantic(call.pos, vec!["`lambda`".to_owned()], "no lambda".to_owned())),
    }
}

/// Parses either kind of descriptor.
pub fn parse_descriptor(text: &str, registry: &FamilyRegistry) -> Result<Descriptor> {
    let mut parser = Parser::new(text);
    let call = parser.call()?;
    parser.finish()?;
    resolve(&call, registry)
}

/// Parses a base descriptor with the bundled families.
pub fn parse_base(text: &str) -> Result<BaseDistribution> {
    match parse_descriptor(text, &FamilyRegistry::bundled())? {
        Descriptor::Base(b) => Ok(b),
        Descriptor::Extended(_) => Err(semantic(
            0,
            vec!["base descriptor".to_owned()],
            "extended descriptor".to_owned(),
        )),
    }
}

/// Parses an extended descriptor with the bundled families.
pub fn parse_extended(text: &str) -> Result<ExtendedDistribution> {
    match parse_descriptor(text, &FamilyRegistry::bundled())? {
        Descriptor::Extended(g) => Ok(g),
        Descriptor::Base(_) => Err(semantic(
            0,
            vec!["`lehmann1`".to_owned(), "`lehmann2`".to_owned()],
            "base descriptor".to_owned(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::Family;
    use proptest::prelude::*;

    #[test]
    fn parses_bundled_bases() {
        assert_eq!(parse_base("uniform()").unwrap(), BaseDistribution::uniform());
        assert_eq!(
            parse_base("exponential(rate=1.5)").unwrap(),
            BaseDistribution::exponential(1.5).unwrap()
        );
        assert_eq!(
            parse_base(" weibull( scale = 1 , shape=2 ) ").unwrap(),
            BaseDistribution::weibull(2.0, 1.0).unwrap()
        );
    }

    #[test]
    fn parses_extended() {
        let g = parse_extended("lehmann2(base=exponential(rate=1), lambda=3e0)").unwrap();
        assert_eq!(g.kind(), Kind::SecondAlternative);
        assert_eq!(g.lambda(), 3.0);
        assert_eq!(g.base(), &BaseDistribution::exponential(1.0).unwrap());
    }

    fn parse_err(text: &str) -> ParseError {
        match parse_descriptor(text, &FamilyRegistry::bundled()) {
            Err(Error::Parse(e)) => e,
            other => panic!("expected parse error for {text:?}, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        let e = parse_err("exponential(rate=1.5");
        assert_eq!(e.position, 20);
        assert!(e.expected.contains(&"`)`".to_owned()));
        assert_eq!(e.found, "end of input");

        let e = parse_err("exponential(rate 1)");
        assert_eq!(e.position, 17);
        assert_eq!(e.expected, vec!["`=`"]);

        let e = parse_err("gamma(shape=1)");
        assert_eq!(e.position, 0);
        assert!(e.expected.contains(&"weibull".to_owned()));

        let e = parse_err("weibull(shape=2)");
        assert!(e.expected.contains(&"`scale`".to_owned()));

        let e = parse_err("exponential(rat=2)");
        assert_eq!(e.position, 12);

        let e = parse_err("uniform() trailing");
        assert_eq!(e.position, 10);
        assert_eq!(e.expected, vec!["end of input"]);

        let e = parse_err("lehmann1(base=uniform(), lambda=abc())");
        assert_eq!(e.expected, vec!["number"]);

        let msg = Error::Parse(parse_err("exponential(rate=)")).to_string();
        assert!(msg.contains("position 17"), "{msg}");
    }

    #[test]
    fn invalid_values_are_parameter_errors() {
        assert!(matches!(
            parse_base("exponential(rate=-1)"),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            parse_extended("lehmann1(base=uniform(),lambda=0)"),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn registry_extension_is_visible_to_parser() {
        #[derive(Debug)]
        struct Renamed;
        impl crate::base::ParametricFamily for Renamed {
            fn name(&self) -> &str {
                "expo"
            }
            fn param_names(&self) -> &[&'static str] {
                &["rate"]
            }
            fn build(&self, theta: &[f64]) -> Result<BaseDistribution> {
                Family::Exponential.build(theta)
            }
        }
        let mut reg = FamilyRegistry::bundled();
        reg.register(std::sync::Arc::new(Renamed));
        let d = parse_descriptor("expo(rate=2)", &reg).unwrap();
        assert_eq!(d, Descriptor::Base(BaseDistribution::exponential(2.0).unwrap()));
    }

    proptest! {
        #[test]
        fn display_parses_back(
            shape in 0.05f64..20.0,
            scale in 0.05f64..20.0,
            lambda in 0.01f64..100.0,
            second in any::<bool>(),
        ) {
            let kind = if second { Kind::SecondAlternative } else { Kind::FirstAlternative };
            let g = ExtendedDistribution::new(BaseDistribution::weibull(shape, scale).unwrap(), lambda, kind).unwrap();
            prop_assert_eq!(parse_extended(&g.to_string()).unwrap(), g);
        }
    }
}
