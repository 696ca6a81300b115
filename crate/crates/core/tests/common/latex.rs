//! Reads `\Rule[\presume{..}]{left}{right}` displays into trees.

#[derive(Debug, PartialEq, Eq)]
pub struct Node {
    pub left: String,
    pub right: String,
    pub presumptions: Vec<Node>,
}

struct Reader<'a> {
    s: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while self.at < self.s.len() && self.s[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.s[self.at..].starts_with(lit.as_bytes()) {
            self.at += lit.len();
            true
        } else {
            false
        }
    }

    /// Text between a `open` and its matching `close`; escaped braces do not count.
    fn group(&mut self, open: u8, close: u8) -> Result<String, String> {
        self.skip_ws();
        if self.s.get(self.at) != Some(&open) {
            return Err(format!("expected `{}` at {}", open as char, self.at));
        }
        let start = self.at + 1;
        let (mut depth, mut braces) = (0usize, 0usize);
        let mut k = self.at;
        while k < self.s.len() {
            let c = self.s[k];
            if c == b'\\' {
                k += 2;
                continue;
            }
            if open != b'{' {
                match c {
                    b'{' => braces += 1,
                    b'}' => braces -= 1,
                    _ => {}
                }
            }
            if braces == 0 || open == b'{' {
                if c == open {
                    depth += 1;
                } else if c == close {
                    depth -= 1;
                    if depth == 0 {
                        self.at = k + 1;
                        return Ok(String::from_utf8_lossy(&self.s[start..k]).into_owned());
                    }
                }
            }
            k += 1;
        }
        Err("unbalanced group".into())
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Split at `\\` (with an optional spacing argument) outside groups.
fn items(s: &str) -> Vec<String> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let (mut depth, mut start, mut k) = (0i32, 0, 0);
    while k < b.len() {
        match b[k] {
            b'\\' if b.get(k + 1) == Some(&b'\\') && depth == 0 => {
                out.push(s[start..k].to_string());
                k += 2;
                if b.get(k) == Some(&b'[') {
                    while b[k] != b']' {
                        k += 1;
                    }
                    k += 1;
                }
                start = k;
                continue;
            }
            b'\\' => k += 1,
            b'{' => depth += 1,
            b'}' => depth -= 1,
            _ => {}
        }
        k += 1;
    }
    out.push(s[start..].to_string());
    out.into_iter().filter(|x| !x.trim().is_empty()).collect()
}

fn presumptions(opt: &str) -> Result<Vec<Node>, String> {
    let mut text = opt.trim().to_string();
    if text.starts_with('{') {
        let mut r = Reader { s: text.as_bytes(), at: 0 };
        text = r.group(b'{', b'}')?;
    }
    let mut r = Reader { s: text.as_bytes(), at: 0 };
    if !r.eat("\\presume") {
        return Err(format!("no presumptions in `{text}`"));
    }
    r.skip_ws();
    if r.s.get(r.at) == Some(&b'[') {
        r.group(b'[', b']')?;
    }
    let body = r.group(b'{', b'}')?;
    items(&body).iter().map(|i| parse(i)).collect()
}

pub fn parse(src: &str) -> Result<Node, String> {
    let mut r = Reader { s: src.as_bytes(), at: 0 };
    if !r.eat("\\Rule") {
        return Err(format!("not a rule: `{}`", src.trim()));
    }
    r.skip_ws();
    let presumptions = if r.s.get(r.at) == Some(&b'[') { presumptions(&r.group(b'[', b']')?)? } else { Vec::new() };
    let left = squash(&r.group(b'{', b'}')?);
    let right = squash(&r.group(b'{', b'}')?);
    Ok(Node { left, right, presumptions })
}

/// The rule inside a `defrule` document fragment.
pub fn rule_of_fragment(doc: &str) -> Result<Node, String> {
    let start = doc.find("\\ensuremath{").ok_or("no \\ensuremath")? + "\\ensuremath".len();
    let mut r = Reader { s: &doc.as_bytes()[start..], at: 0 };
    parse(&r.group(b'{', b'}')?)
}
