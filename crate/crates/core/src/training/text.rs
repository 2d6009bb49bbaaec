/// Lowercase, split on whitespace, drop punctuation characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| !c.is_ascii_punctuation() && !c.is_control())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowercases_and_strips_punctuation() {
        assert_eq!(tokenize("  Red, SHOES!  size-9 "), vec!["red", "shoes", "size9"]);
        assert_eq!(tokenize("?? ..."), Vec::<String>::new());
        assert_eq!(tokenize("Café au lait"), vec!["café", "au", "lait"]);
    }
}
