//! Holds the `acceptance` test binary, which prints one PASS/FAIL line per
//! criterion and exits non-zero when any of them fails.
