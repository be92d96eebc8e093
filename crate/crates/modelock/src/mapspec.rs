//! Mini-language for map specifications, shared by the CLI and tests.
//!
//! Grammar (whitespace-separated, newlines allowed):
//!   standard a=<expr>
//!   rotation theta=<expr>
//!   conjrot  theta=<expr> eps=<expr>
//!   trigpoly c0=<expr> a=[<expr>,...] b=[<expr>,...]
//! Expressions support decimals, `pi`, `golden`, `+ - * /`, unary
//! minus, and parentheses. `standard a=x` is sugar for the trig
//! polynomial with b_1 = a.
//!
//! ```
//! use modelock::mapspec::parse_map;
//!
//! let m = parse_map("conjrot theta=golden eps=0.1", 128).unwrap();
//! assert!(matches!(m, modelock::CircleLift::ConjugatedRotation { .. }));
//! assert!(parse_map("standard a=1/(2*pi)", 128).is_err()); // not a diffeomorphism
//! ```

use rug::Float;

use crate::circlemap::CircleLift;
use crate::precision::{golden, pi};
use crate::Error;

/// Evaluates an arithmetic expression to a `Float` at `prec` bits.
pub fn eval_expr(src: &str, prec: u32) -> Result<Float, Error> {
    let mut p = ExprParser {
        src: src.as_bytes(),
        pos: 0,
        prec,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Parse(format!(
            "trailing input at byte {} in {src:?}",
            p.pos
        )));
    }
    Ok(v)
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    prec: u32,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Float, Error> {
        let mut acc = self.term()?;
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc -= self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Float, Error> {
        let mut acc = self.factor()?;
        while let Some(op) = self.peek() {
            match op {
                b'*' => {
                    self.pos += 1;
                    acc *= self.factor()?;
                }
                b'/' => {
                    self.pos += 1;
                    let d = self.factor()?;
                    if d.is_zero() {
                        return Err(Error::Parse("division by zero".into()));
                    }
                    acc /= d;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Float, Error> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::Parse("expected ')'".into()));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }

    fn number(&mut self) -> Result<Float, Error> {
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos > start
                && self
                    .src
                    .get(self.pos + 1)
                    .is_some_and(|&n| n.is_ascii_digit() || n == b'+' || n == b'-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        crate::precision::parse_float(self.prec, text)
            .ok_or_else(|| Error::Parse(format!("bad number {text:?}")))
    }

    fn ident(&mut self) -> Result<Float, Error> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match name {
            "pi" => Ok(pi(self.prec)),
            "golden" => Ok(golden(self.prec)),
            _ => Err(Error::Parse(format!("unknown constant {name:?}"))),
        }
    }
}

/// Splits `key=value` tokens; values may contain `=`-free expressions
/// or bracketed lists (spaces allowed inside brackets/parens).
fn tokenize(spec: &str) -> Result<(String, Vec<(String, String)>), Error> {
    let mut words: Vec<String> = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in spec.chars() {
        match ch {
            '[' | '(' => {
                depth += 1;
                cur.push(ch);
            }
            ']' | ')' => {
                depth -= 1;
                cur.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    words.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    if depth != 0 {
        return Err(Error::Parse("unbalanced brackets".into()));
    }
    let mut it = words.into_iter();
    let head = it.next().ok_or_else(|| Error::Parse("empty map spec".into()))?;
    let mut kvs = Vec::new();
    for w in it {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {w:?}")))?;
        kvs.push((k.to_string(), v.to_string()));
    }
    Ok((head, kvs))
}

fn eval_list(src: &str, prec: u32) -> Result<Vec<Float>, Error> {
    let inner = src
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected [list], got {src:?}")))?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|e| eval_expr(e, prec)).collect()
}

fn take<'a>(kvs: &'a [(String, String)], key: &str) -> Result<&'a str, Error> {
    kvs.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse(format!("missing {key}=...")))
}

/// Parses an inline map spec into a lift at `prec` bits.
///
/// Two equivalent forms: the inline `conjrot theta=golden eps=0.1` and
/// the document `kind=conjrot theta=golden epsilon=0.1` (as used in map
/// files). `eps` and `epsilon` are interchangeable.
pub fn parse_map(spec: &str, prec: u32) -> Result<CircleLift, Error> {
    let (head, mut kvs) = tokenize(spec.trim())?;
    let head = if let Some((k, v)) = head.split_once('=') {
        // Document form: the head is itself a key=value pair.
        if k != "kind" {
            return Err(Error::Parse(format!("expected kind=..., got {k:?}")));
        }
        v.to_string()
    } else {
        head
    };
    for (k, _) in &mut kvs {
        if k == "epsilon" {
            *k = "eps".into();
        }
    }
    for (k, _) in &kvs {
        let known: &[&str] = match head.as_str() {
            "standard" => &["a"],
            "rotation" => &["theta"],
            "conjrot" => &["theta", "eps"],
            "trigpoly" => &["c0", "a", "b"],
            _ => &[],
        };
        if !known.is_empty() && !known.contains(&k.as_str()) {
            return Err(Error::Parse(format!("unknown key {k:?} for {head}")));
        }
    }
    match head.as_str() {
        "standard" => CircleLift::standard(eval_expr(take(&kvs, "a")?, prec)?),
        "rotation" => Ok(CircleLift::rotation(eval_expr(take(&kvs, "theta")?, prec)?)),
        "conjrot" => {
            let theta = eval_expr(take(&kvs, "theta")?, prec)?;
            let eps = eval_expr(take(&kvs, "eps")?, prec)?;
            crate::herman::make_conjugated_rotation(theta, eps)
        }
        "trigpoly" => {
            let c0 = eval_expr(take(&kvs, "c0")?, prec)?;
            let a = eval_list(take(&kvs, "a")?, prec)?;
            let b = eval_list(take(&kvs, "b")?, prec)?;
            CircleLift::trig_poly(c0, a, b)
        }
        other => Err(Error::Parse(format!("unknown map kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::float;

    #[test]
    fn expressions() {
        let prec = 128;
        assert_eq!(eval_expr("2+3*4", prec).unwrap(), 14);
        assert_eq!(eval_expr("(2+3)*4", prec).unwrap(), 20);
        assert_eq!(eval_expr("-2-3", prec).unwrap(), -5);
        let quarter = eval_expr("1/(4*pi)", prec).unwrap();
        assert!((quarter.clone() * pi(prec) * 4u32 - 1u32).abs() < float(64, 1e-35));
        let g = eval_expr("golden", prec).unwrap();
        assert!((g.clone() * &g + &g - 1u32).abs() < float(64, 1e-35));
        let x = eval_expr("1.5e-2", prec).unwrap();
        assert_eq!(x, crate::precision::parse_float(prec, "0.015").unwrap());
        assert!(eval_expr("1/0", prec).is_err());
        assert!(eval_expr("2+", prec).is_err());
        assert!(eval_expr("2 3", prec).is_err());
        assert!(eval_expr("tau", prec).is_err());
    }

    #[test]
    fn standard_sugar() {
        let prec = 128;
        let m = parse_map("standard a=1/(4*pi)", prec).unwrap();
        match &m {
            CircleLift::TrigPoly { c0, a, b } => {
                assert!(c0.is_zero());
                assert!(a[0].is_zero());
                assert!((b[0].clone() * pi(prec) * 4u32 - 1u32).abs() < float(64, 1e-35));
            }
            _ => panic!("expected trig polynomial"),
        }
    }

    #[test]
    fn rotation_and_conjrot() {
        let prec = 128;
        assert!(parse_map("rotation theta=golden", prec).unwrap().is_rotation());
        let m = parse_map("conjrot theta=golden eps=0.1", prec).unwrap();
        assert!(matches!(m, CircleLift::ConjugatedRotation { .. }));
        // eps = 0 degenerates to a rotation.
        assert!(parse_map("conjrot theta=golden eps=0", prec)
            .unwrap()
            .is_rotation());
        assert!(parse_map("conjrot theta=golden eps=0.3", prec).is_err());
    }

    #[test]
    fn trigpoly_lists() {
        let prec = 128;
        let m = parse_map("trigpoly c0=0.1 a=[0.01, 0.002] b=[0.02,0.001]", prec).unwrap();
        match m {
            CircleLift::TrigPoly { a, b, .. } => {
                assert_eq!(a.len(), 2);
                assert_eq!(b.len(), 2);
            }
            _ => panic!(),
        }
        assert!(parse_map("trigpoly c0=0 a=[1.0] b=[]", prec).is_err());
    }

    #[test]
    fn malformed_specs() {
        let prec = 64;
        assert!(parse_map("", prec).is_err());
        assert!(parse_map("mystery x=1", prec).is_err());
        assert!(parse_map("standard", prec).is_err());
        assert!(parse_map("standard b=0.1", prec).is_err());
        assert!(parse_map("trigpoly c0=0 a=[0.1 b=[0.1]", prec).is_err());
    }

    #[test]
    fn multiline_file_style() {
        let prec = 128;
        let m = parse_map("conjrot\n  theta=golden\n  eps=0.1\n", prec).unwrap();
        assert!(matches!(m, CircleLift::ConjugatedRotation { .. }));
        let m = parse_map("kind=conjrot theta=golden epsilon=0.1", prec).unwrap();
        assert!(matches!(m, CircleLift::ConjugatedRotation { .. }));
        assert!(parse_map("type=conjrot theta=golden", prec).is_err());
    }
}
