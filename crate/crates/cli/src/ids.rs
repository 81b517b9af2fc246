//! Comma-separated token id lists, e.g. `3,7,12`. The empty string is the
//! empty list.

use prophet_dlm::TokenId;

pub fn parse_ids(s: &str) -> Result<Vec<TokenId>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<TokenId>()
                .map_err(|_| format!("{part:?} is not a token id"))
        })
        .collect()
}

pub fn format_ids(ids: &[TokenId]) -> String {
    ids.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// `start,end` pair.
pub fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .trim()
        .split_once(',')
        .ok_or_else(|| format!("{s:?} is not `start,end`"))?;
    let a = a.trim().parse().map_err(|_| format!("bad start {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad end {b:?}"))?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        assert_eq!(parse_ids("3,7, 12").unwrap(), vec![3, 7, 12]);
        assert_eq!(parse_ids("").unwrap(), Vec::<TokenId>::new());
        assert!(parse_ids("3,x").is_err());
        assert_eq!(format_ids(&[3, 7]), "3,7");
        assert_eq!(parse_range("4, 9").unwrap(), (4, 9));
        assert!(parse_range("4").is_err());
    }
}
