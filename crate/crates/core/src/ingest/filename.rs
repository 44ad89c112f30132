//! Challenge file-name grammar: `Day<digits>_<tag>_<YYYYMMDD>_<HHMMSS>.<ext>`.

use chrono::{NaiveDate, NaiveDateTime};

use super::IngestError;

fn malformed(name: &str, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedName {
        name: name.to_string(),
        reason: reason.into(),
    }
}

/// Parse the day number and timestamp out of a recording file name.
///
/// The tag between the day prefix and the date is free text; the *last* two
/// underscore-separated fields are taken as date and time, so tags may
/// themselves contain underscores. Date and time are validated strictly
/// (month 1-12, real calendar dates, 24-hour clock).
pub fn parse_filename(name: &str) -> Result<(u32, NaiveDateTime), IngestError> {
    let stem = name
        .strip_suffix(".mat")
        .or_else(|| name.strip_suffix(".csv"))
        .ok_or_else(|| malformed(name, "expected a .mat or .csv extension"))?;

    let rest = stem
        .strip_prefix("Day")
        .ok_or_else(|| malformed(name, "missing `Day` prefix"))?;
    let (day_digits, rest) = rest
        .split_once('_')
        .ok_or_else(|| malformed(name, "missing `_` after the day number"))?;
    if day_digits.is_empty() || !day_digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(name, "day number must be decimal digits"));
    }
    let day: u32 = day_digits
        .parse()
        .map_err(|_| malformed(name, "day number out of range"))?;

    let mut fields = rest.rsplitn(3, '_');
    let time_field = fields.next().filter(|f| !f.is_empty());
    let date_field = fields.next().filter(|f| !f.is_empty());
    let tag = fields.next().filter(|f| !f.is_empty());
    let (time_field, date_field) = match (time_field, date_field, tag) {
        (Some(t), Some(d), Some(_)) => (t, d),
        _ => return Err(malformed(name, "expected `<tag>_<YYYYMMDD>_<HHMMSS>`")),
    };

    if date_field.len() != 8 || !date_field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(name, "date field must be 8 digits (YYYYMMDD)"));
    }
    if time_field.len() != 6 || !time_field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(name, "time field must be 6 digits (HHMMSS)"));
    }

    let year: i32 = date_field[0..4].parse().unwrap();
    let month: u32 = date_field[4..6].parse().unwrap();
    let dom: u32 = date_field[6..8].parse().unwrap();
    let hour: u32 = time_field[0..2].parse().unwrap();
    let minute: u32 = time_field[2..4].parse().unwrap();
    let second: u32 = time_field[4..6].parse().unwrap();

    let date = NaiveDate::from_ymd_opt(year, month, dom)
        .ok_or_else(|| malformed(name, format!("invalid calendar date {date_field}")))?;
    let timestamp = date
        .and_hms_opt(hour, minute, second)
        .ok_or_else(|| malformed(name, format!("invalid time of day {time_field}")))?;

    Ok((day, timestamp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dt(y: i32, mo: u32, d: u32, h: u32, mi: u32, s: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(y, mo, d)
            .unwrap()
            .and_hms_opt(h, mi, s)
            .unwrap()
    }

    #[test]
    fn parses_challenge_names() {
        assert_eq!(
            parse_filename("Day022_Hunting_SSA_20211209_124241.mat").unwrap(),
            (22, dt(2021, 12, 9, 12, 42, 41))
        );
        assert_eq!(
            parse_filename("Day027_Hunting_SSA_20220118_111018.mat").unwrap(),
            (27, dt(2022, 1, 18, 11, 10, 18))
        );
        assert_eq!(
            parse_filename("Day000_X_20200101_000000.mat").unwrap(),
            (0, dt(2020, 1, 1, 0, 0, 0))
        );
    }

    #[test]
    fn tag_may_contain_underscores() {
        let (day, ts) = parse_filename("Day003_a_b_c_20210601_080910.csv").unwrap();
        assert_eq!(day, 3);
        assert_eq!(ts, dt(2021, 6, 1, 8, 9, 10));
    }

    #[test]
    fn rejects_bad_names() {
        let cases = [
            "Day022_Hunting_SSA_20211209_124241", // no extension
            "Run022_Hunting_SSA_20211209_124241.mat",
            "Day_X_20200101_000000.mat",          // empty day digits
            "Day01_20200101_000000.mat",          // missing tag
            "Day01_X_20201301_000000.mat",        // month 13
            "Day01_X_20200230_000000.mat",        // Feb 30
            "Day01_X_20200101_250000.mat",        // hour 25
            "Day01_X_2020011_000000.mat",         // 7-digit date
            "Day01_X_20200101_00000.mat",         // 5-digit time
        ];
        for case in cases {
            assert!(
                matches!(
                    parse_filename(case),
                    Err(IngestError::MalformedName { .. })
                ),
                "expected MalformedName for {case}"
            );
        }
    }

    #[test]
    fn ordering_matches_lexicographic_names() {
        // With zero-padded day numbers and a fixed-width suffix, sorting by
        // (day, timestamp, name) must agree with plain name order.
        let mut names = Vec::new();
        for day in [0u32, 5, 21, 22, 27, 140] {
            for (date, time) in [("20211208", "104755"), ("20211209", "081500")] {
                names.push(format!("Day{day:03}_Hunting_SSA_{date}_{time}.mat"));
            }
        }
        let mut by_name = names.clone();
        by_name.sort();
        let mut by_key = names;
        by_key.sort_by_key(|n| {
            let (day, ts) = parse_filename(n).unwrap();
            (day, ts, n.clone())
        });
        assert_eq!(by_name, by_key);
    }
}
