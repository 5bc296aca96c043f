//! Decoding of the LaTeX markup that shows up in BibTeX field values.
//!
//! Only the subset that matters for search is handled: accent commands,
//! special letters, escaped punctuation and grouping braces. Unknown control
//! words are dropped while their arguments are kept (`\emph{x}` becomes `x`).

use unicode_normalization::UnicodeNormalization;

fn accent_mark(cmd: &str) -> Option<char> {
    Some(match cmd {
        "'" => '\u{0301}',
        "`" => '\u{0300}',
        "^" => '\u{0302}',
        "\"" => '\u{0308}',
        "~" => '\u{0303}',
        "=" => '\u{0304}',
        "." => '\u{0307}',
        "u" => '\u{0306}',
        "v" => '\u{030C}',
        "H" => '\u{030B}',
        "c" => '\u{0327}',
        "k" => '\u{0328}',
        "r" => '\u{030A}',
        "d" => '\u{0323}',
        "b" => '\u{0331}',
        _ => return None,
    })
}

fn special_letter(cmd: &str) -> Option<&'static str> {
    Some(match cmd {
        "l" => "ł",
        "L" => "Ł",
        "o" => "ø",
        "O" => "Ø",
        "ss" => "ß",
        "ae" => "æ",
        "AE" => "Æ",
        "oe" => "œ",
        "OE" => "Œ",
        "aa" => "å",
        "AA" => "Å",
        "i" => "ı",
        "j" => "ȷ",
        "dh" => "ð",
        "DH" => "Ð",
        "th" => "þ",
        "TH" => "Þ",
        "ng" => "ŋ",
        "NG" => "Ŋ",
        _ => return None,
    })
}

/// Decodes LaTeX escapes to Unicode and strips grouping braces and math
/// shifts. Plain text passes through unchanged.
pub fn decode_latex(text: &str) -> String {
    if !text.contains(['\\', '{', '}', '$', '~']) {
        return text.to_string();
    }
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    decode_into(&chars, &mut out);
    out.nfc().collect()
}

fn decode_into(chars: &[char], out: &mut String) {
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '{' | '}' | '$' => i += 1,
            '~' => {
                out.push(' ');
                i += 1;
            }
            '\\' => i = decode_command(chars, i + 1, out),
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
}

/// Handles the command starting after a backslash at `start`; returns the
/// index just past everything consumed.
fn decode_command(chars: &[char], start: usize, out: &mut String) -> usize {
    let Some(&first) = chars.get(start) else {
        return start;
    };
    if !first.is_ascii_alphabetic() {
        let cmd = first.to_string();
        if let Some(mark) = accent_mark(&cmd) {
            return apply_accent(chars, start + 1, mark, false, out);
        }
        match first {
            '\\' => out.push(' '),
            ' ' => out.push(' '),
            '&' | '%' | '$' | '#' | '_' | '{' | '}' => out.push(first),
            '-' | '/' | ',' | ';' | '!' => {}
            other => out.push(other),
        }
        return start + 1;
    }
    let mut end = start;
    while end < chars.len() && chars[end].is_ascii_alphabetic() {
        end += 1;
    }
    let name: String = chars[start..end].iter().collect();
    if let Some(mark) = accent_mark(&name) {
        return apply_accent(chars, end, mark, true, out);
    }
    if let Some(letter) = special_letter(&name) {
        out.push_str(letter);
        // a control word swallows the space that terminates it
        if chars.get(end) == Some(&' ') {
            return end + 1;
        }
        return end;
    }
    end
}

fn apply_accent(chars: &[char], mut pos: usize, mark: char, letter_cmd: bool, out: &mut String) -> usize {
    if letter_cmd {
        while chars.get(pos) == Some(&' ') {
            pos += 1;
        }
    }
    let mut base = String::new();
    match chars.get(pos) {
        Some('{') => {
            let mut depth = 0usize;
            let mut end = pos;
            while end < chars.len() {
                match chars[end] {
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                end += 1;
            }
            decode_into(&chars[pos + 1..end.min(chars.len())], &mut base);
            pos = (end + 1).min(chars.len());
        }
        Some('\\') => {
            pos = decode_command(chars, pos + 1, &mut base);
        }
        Some(&c) => {
            base.push(c);
            pos += 1;
        }
        None => {}
    }
    let mut it = base.chars();
    if let Some(c) = it.next() {
        // dotless i under an accent is just i
        out.push(if c == 'ı' { 'i' } else { c });
        out.push(mark);
        out.extend(it);
    }
    pos
}
