//! Input generation helpers for the benchmarks.

/// A syntactically valid Tiny program with `n` top-level commands, cycling
/// through assignments, repeats and conditionals.
pub fn tiny_program(n: usize) -> String {
    let mut out = String::new();
    for i in 0..n {
        match i % 4 {
            0 => out.push_str(&format!("x{} := {} + {} * 2;\n", i, i, i + 1)),
            1 => out.push_str(&format!(
                "repeat\n  x{} := x{} - 1;\nuntil (x{} < 1);\n",
                i, i, i
            )),
            2 => out.push_str(&format!(
                "if (x{} < 10) then\n  write x{};\nelse\n  write 10;\nend;\n",
                i, i
            )),
            _ => out.push_str(&format!("read x{};\n", i)),
        }
    }
    out.push_str("write 0;\n");
    out
}
