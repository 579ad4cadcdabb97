//! Verilog-2001 rendering of the pixel-serial grading pipeline.
//!
//! The output is a single self-contained module with no vendor primitives.
//! Its register stages mirror [`crate::stream_hw`]: compare, count, output.
//! The grade is decided with shift-compares, so the design has neither a
//! divider nor a multiplier.

use std::fmt::Write as _;

use thiserror::Error;

use crate::stream_hw::counter_bits;
use crate::types::Thresholds;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HdlError {
    #[error("invalid HDL config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitConfig {
    pub thresholds: Thresholds,
    pub width: u32,
    pub height: u32,
    pub module_name: String,
}

impl Default for EmitConfig {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            width: 640,
            height: 480,
            module_name: "potato_green_grader".to_string(),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "always",
    "assign",
    "begin",
    "case",
    "default",
    "else",
    "end",
    "endcase",
    "endmodule",
    "if",
    "initial",
    "input",
    "localparam",
    "module",
    "output",
    "parameter",
    "reg",
    "wire",
];

impl EmitConfig {
    pub fn counter_bits(&self) -> u32 {
        counter_bits(self.width, self.height)
    }

    pub fn validate(&self) -> Result<(), HdlError> {
        if self.width == 0 || self.height == 0 {
            return Err(HdlError::InvalidConfig(format!(
                "frame must be at least 1x1, got {}x{}",
                self.width, self.height
            )));
        }
        let name = &self.module_name;
        let valid_ident = name
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid_ident || KEYWORDS.contains(&name.as_str()) {
            return Err(HdlError::InvalidConfig(format!(
                "{name:?} is not a valid module identifier"
            )));
        }
        // Thresholds are range-checked on construction.
        Ok(())
    }
}

fn signed_literal(bits: u32, value: i32) -> String {
    if value < 0 {
        format!("-{bits}'sd{}", value.unsigned_abs())
    } else {
        format!("{bits}'sd{value}")
    }
}

pub fn emit_pipeline(config: &EmitConfig) -> Result<String, HdlError> {
    config.validate()?;
    let t = &config.thresholds;
    let cw = config.counter_bits();
    let pixels = u64::from(config.width) * u64::from(config.height);
    let m = t.marker();
    let mut v = String::new();

    macro_rules! emit {
        ($($arg:tt)*) => {
            writeln!(v, $($arg)*).expect("write to String")
        };
    }

    emit!(
        "// {}: pixel-serial potato greening grader",
        config.module_name
    );
    emit!(
        "// frame {}x{} ({} pixels), counter width {} bits",
        config.width,
        config.height,
        pixels,
        cw
    );
    emit!("// roi   : b < T_BLUE");
    emit!("// green : roi && (r - g) < T_DIFF");
    emit!("// grade : 2 if (green << 1) > roi, 1 if (green << 2) > roi, else 0");
    emit!("// latency 3 cycles (compare, count, output); no divider, no multiplier");
    emit!("");
    emit!("module {} (", config.module_name);
    emit!("    input  wire          clk,");
    emit!("    input  wire          rst,");
    emit!("    input  wire          pixel_valid,");
    emit!("    input  wire [7:0]    pixel_r,");
    emit!("    input  wire [7:0]    pixel_g,");
    emit!("    input  wire [7:0]    pixel_b,");
    emit!("    output reg  [7:0]    overlay_r,");
    emit!("    output reg  [7:0]    overlay_g,");
    emit!("    output reg  [7:0]    overlay_b,");
    emit!("    output reg           overlay_valid,");
    let count_range = format!("[{}:0]", cw - 1);
    emit!("    output reg  {count_range:<9}roi_count,");
    emit!("    output reg  {count_range:<9}green_count,");
    emit!("    output reg  [1:0]    grade,");
    emit!("    output reg           no_roi,");
    emit!("    output reg           grade_valid");
    emit!(");");
    emit!("");
    emit!("    localparam integer CW = {cw};");
    emit!("    localparam [CW-1:0] FRAME_PIXELS = {cw}'d{pixels};");
    emit!("    localparam [8:0] T_BLUE = 9'd{};", t.t_blue());
    emit!(
        "    localparam signed [9:0] T_DIFF = {};",
        signed_literal(10, i32::from(t.t_diff()))
    );
    emit!("    localparam [7:0] MARKER_R = 8'd{};", m.r);
    emit!("    localparam [7:0] MARKER_G = 8'd{};", m.g);
    emit!("    localparam [7:0] MARKER_B = 8'd{};", m.b);
    emit!("");
    emit!("    // stage 1: compare");
    emit!("    wire              in_roi  = {{1'b0, pixel_b}} < T_BLUE;");
    emit!(
        "    wire signed [8:0] rg_diff = $signed({{1'b0, pixel_r}}) - $signed({{1'b0, pixel_g}});"
    );
    emit!("    wire              greenish = rg_diff < T_DIFF;");
    emit!("");
    emit!("    reg        s1_valid;");
    emit!("    reg        s1_roi;");
    emit!("    reg        s1_green;");
    emit!("    reg [23:0] s1_pixel;");
    emit!("");
    emit!("    always @(posedge clk) begin");
    emit!("        if (rst) begin");
    emit!("            s1_valid <= 1'b0;");
    emit!("            s1_roi   <= 1'b0;");
    emit!("            s1_green <= 1'b0;");
    emit!("            s1_pixel <= 24'd0;");
    emit!("        end else begin");
    emit!("            s1_valid <= pixel_valid;");
    emit!("            s1_roi   <= pixel_valid & in_roi;");
    emit!("            s1_green <= pixel_valid & in_roi & greenish;");
    emit!("            s1_pixel <= {{pixel_r, pixel_g, pixel_b}};");
    emit!("        end");
    emit!("    end");
    emit!("");
    emit!("    // stage 2: count");
    emit!("    reg [CW-1:0] pixels_seen;");
    emit!("    reg          s2_valid;");
    emit!("    reg          s2_green;");
    emit!("    reg          s2_last;");
    emit!("    reg [23:0]   s2_pixel;");
    emit!("");
    emit!("    always @(posedge clk) begin");
    emit!("        if (rst) begin");
    emit!("            pixels_seen <= {{CW{{1'b0}}}};");
    emit!("            roi_count   <= {{CW{{1'b0}}}};");
    emit!("            green_count <= {{CW{{1'b0}}}};");
    emit!("            s2_valid    <= 1'b0;");
    emit!("            s2_green    <= 1'b0;");
    emit!("            s2_last     <= 1'b0;");
    emit!("            s2_pixel    <= 24'd0;");
    emit!("        end else begin");
    emit!("            s2_valid <= s1_valid;");
    emit!("            s2_green <= s1_green;");
    emit!("            s2_pixel <= s1_pixel;");
    emit!("            s2_last  <= s1_valid && (pixels_seen == FRAME_PIXELS - 1'b1);");
    emit!("            if (s2_last) begin");
    emit!("                // next frame starts from zero");
    emit!("                pixels_seen <= s1_valid;");
    emit!("                roi_count   <= s1_roi;");
    emit!("                green_count <= s1_green;");
    emit!("            end else if (s1_valid) begin");
    emit!("                pixels_seen <= pixels_seen + 1'b1;");
    emit!("                roi_count   <= roi_count + s1_roi;");
    emit!("                green_count <= green_count + s1_green;");
    emit!("            end");
    emit!("        end");
    emit!("    end");
    emit!("");
    emit!("    // frame-end grade by shift-compare");
    emit!("    wire [CW+1:0] green_ext = {{2'b00, green_count}};");
    emit!("    wire [CW+1:0] roi_ext   = {{2'b00, roi_count}};");
    emit!("    wire          over_half    = (green_ext << 1) > roi_ext;");
    emit!("    wire          over_quarter = (green_ext << 2) > roi_ext;");
    emit!("");
    emit!("    // stage 3: output");
    emit!("    always @(posedge clk) begin");
    emit!("        if (rst) begin");
    emit!("            overlay_r     <= 8'd0;");
    emit!("            overlay_g     <= 8'd0;");
    emit!("            overlay_b     <= 8'd0;");
    emit!("            overlay_valid <= 1'b0;");
    emit!("            grade         <= 2'd0;");
    emit!("            no_roi        <= 1'b0;");
    emit!("            grade_valid   <= 1'b0;");
    emit!("        end else begin");
    emit!("            overlay_valid <= s2_valid;");
    emit!("            if (s2_green) begin");
    emit!("                overlay_r <= MARKER_R;");
    emit!("                overlay_g <= MARKER_G;");
    emit!("                overlay_b <= MARKER_B;");
    emit!("            end else begin");
    emit!("                overlay_r <= s2_pixel[23:16];");
    emit!("                overlay_g <= s2_pixel[15:8];");
    emit!("                overlay_b <= s2_pixel[7:0];");
    emit!("            end");
    emit!("            grade_valid <= s2_last;");
    emit!("            if (s2_last) begin");
    emit!("                no_roi <= (roi_count == {{CW{{1'b0}}}});");
    emit!("                if (over_half)");
    emit!("                    grade <= 2'd2;");
    emit!("                else if (over_quarter)");
    emit!("                    grade <= 2'd1;");
    emit!("                else");
    emit!("                    grade <= 2'd0;");
    emit!("            end");
    emit!("        end");
    emit!("    end");
    emit!("");
    emit!("endmodule");
    Ok(v)
}

/// Token-level structure check: `begin`/`end`, `case`/`endcase` and
/// `module`/`endmodule` must nest properly, and brackets must balance.
pub fn check_balance(text: &str) -> Result<(), String> {
    let mut stack: Vec<&str> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let code = raw.split("//").next().unwrap_or("");
        let mut word = String::new();
        let mut tokens: Vec<String> = Vec::new();
        for c in code.chars() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                word.push(c);
            } else {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                if "()[]{}".contains(c) {
                    tokens.push(c.to_string());
                }
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
        for tok in &tokens {
            let open = match tok.as_str() {
                "module" => Some("module"),
                "begin" => Some("begin"),
                "case" => Some("case"),
                "(" => Some("("),
                "[" => Some("["),
                "{" => Some("{"),
                _ => None,
            };
            if let Some(o) = open {
                stack.push(o);
                continue;
            }
            let expected = match tok.as_str() {
                "endmodule" => "module",
                "end" => "begin",
                "endcase" => "case",
                ")" => "(",
                "]" => "[",
                "}" => "{",
                _ => continue,
            };
            match stack.pop() {
                Some(top) if top == expected => {}
                other => {
                    return Err(format!(
                        "line {}: {tok:?} closes {other:?}, expected {expected:?}",
                        lineno + 1
                    ))
                }
            }
        }
    }
    if stack.is_empty() {
        Ok(())
    } else {
        Err(format!("unclosed: {stack:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::RgbPixel;

    #[test]
    fn default_constants() {
        let text = emit_pipeline(&EmitConfig::default()).unwrap();
        assert!(text.contains("localparam [8:0] T_BLUE = 9'd200;"));
        assert!(text.contains("localparam signed [9:0] T_DIFF = 10'sd20;"));
        assert!(text.contains("localparam integer CW = 19;"));
        assert!(text.contains("(green_ext << 1) > roi_ext"));
        assert!(text.contains("(green_ext << 2) > roi_ext"));
        assert!(!text.contains(" / "));
        assert!(!text.contains(" * "));
    }

    #[test]
    fn negative_diff_literal() {
        let cfg = EmitConfig {
            thresholds: Thresholds::new(256, -255, RgbPixel::BLACK).unwrap(),
            ..EmitConfig::default()
        };
        let text = emit_pipeline(&cfg).unwrap();
        assert!(text.contains("T_DIFF = -10'sd255;"));
        assert!(text.contains("T_BLUE = 9'd256;"));
        check_balance(&text).unwrap();
    }

    #[test]
    fn deterministic_and_balanced() {
        let cfg = EmitConfig::default();
        let a = emit_pipeline(&cfg).unwrap();
        assert_eq!(a, emit_pipeline(&cfg).unwrap());
        check_balance(&a).unwrap();
    }

    #[test]
    fn balance_checker_catches_errors() {
        assert!(check_balance("module m; begin end").is_err());
        assert!(check_balance("module m; begin endmodule end").is_err());
        assert!(check_balance("module m (a[3:0); endmodule").is_err());
        assert!(check_balance("module m; // begin\nendmodule").is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_name = EmitConfig {
            module_name: "3grader".into(),
            ..EmitConfig::default()
        };
        assert!(emit_pipeline(&bad_name).is_err());
        let keyword = EmitConfig {
            module_name: "module".into(),
            ..EmitConfig::default()
        };
        assert!(emit_pipeline(&keyword).is_err());
        let empty = EmitConfig {
            width: 0,
            ..EmitConfig::default()
        };
        assert!(matches!(
            emit_pipeline(&empty),
            Err(HdlError::InvalidConfig(_))
        ));
    }

    #[test]
    fn one_pixel_frame() {
        let cfg = EmitConfig {
            width: 1,
            height: 1,
            ..EmitConfig::default()
        };
        let text = emit_pipeline(&cfg).unwrap();
        assert!(text.contains("localparam integer CW = 1;"));
        assert!(text.contains("FRAME_PIXELS = 1'd1;"));
    }
}
