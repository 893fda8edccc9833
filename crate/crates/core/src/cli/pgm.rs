//! Plain (P2) portable graymaps.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub comments: Vec<String>,
    /// Row-major, top row first.
    pub pixels: Vec<u16>,
}

impl Graymap {
    pub fn encode(&self) -> String {
        let mut out = String::from("P2\n");
        for c in &self.comments {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        let _ = writeln!(out, "{} {}", self.width, self.height);
        let _ = writeln!(out, "{}", self.maxval);
        for row in self.pixels.chunks(self.width.max(1)) {
            let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Reads a P2 file, keeping its comments.
    pub fn decode(text: &str) -> Result<Self, String> {
        let mut comments = Vec::new();
        let mut tokens = Vec::new();
        for line in text.lines() {
            let (data, comment) = match line.find('#') {
                Some(i) => (&line[..i], Some(line[i + 1..].trim())),
                None => (line, None),
            };
            if let Some(c) = comment {
                comments.push(c.to_string());
            }
            tokens.extend(data.split_whitespace());
        }
        let mut it = tokens.into_iter();
        if it.next() != Some("P2") {
            return Err("missing P2 magic".into());
        }
        let mut num = |what: &str| -> Result<usize, String> {
            it.next()
                .ok_or_else(|| format!("missing {what}"))?
                .parse()
                .map_err(|_| format!("bad {what}"))
        };
        let width = num("width")?;
        let height = num("height")?;
        let maxval = num("maxval")? as u16;
        let pixels = (0..width * height)
            .map(|_| num("pixel").map(|p| p as u16))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Graymap {
            width,
            height,
            maxval,
            comments,
            pixels,
        })
    }
}
