//! Generated sample programs for benchmarks and scale tests.

use std::fmt::Write;

const CLASSES: [&str; 34] = [
    "Restaurant", "Menu", "Dish", "Ingredient", "Supplier", "Order", "OrderLine", "Table", "Reservation", "Guest",
    "Waiter", "Chef", "Kitchen", "Station", "Ticket", "Bill", "Payment", "Card", "Voucher", "Shift", "Schedule",
    "Employee", "Manager", "Inventory", "StockItem", "Delivery", "Invoice", "Recipe", "Allergen", "Review", "Feedback",
    "Promotion", "Loyalty", "Address",
];

const ENUMS: [(&str, [&str; 4]); 3] = [
    ("OrderState", ["OPEN", "COOKING", "SERVED", "PAID"]),
    ("PaymentKind", ["CASH", "CARD", "VOUCHER", "ONLINE"]),
    ("Course", ["STARTER", "MAIN", "DESSERT", "DRINK"]),
];

const OPERATORS: [&str; 12] = ["-->", "--", "<--", "<-->", "!--", "--!", "<>--", "--<>", "*--", "--*", "extends", "implements"];

/// Grid position of class `i`; enums stack at x = 0 to the left.
pub fn scale_position(i: usize) -> (f64, f64) {
    let col = i % 6;
    let row = i / 6;
    (320.0 + 300.0 * col as f64, 360.0 * row as f64)
}

/// Association endpoints (indices into the class list) of the scale program.
pub fn scale_associations() -> Vec<(usize, usize, &'static str)> {
    let mut out = Vec::new();
    for i in 0..CLASSES.len() - 1 {
        out.push((i, i + 1, OPERATORS[i % OPERATORS.len()]));
    }
    for i in 0..CLASSES.len() - 6 {
        if i % 2 == 0 {
            out.push((i, i + 6, OPERATORS[(i / 2) % OPERATORS.len()]));
        }
    }
    out
}

/// A restaurant-domain class diagram of 34 classes and 3 enumerations with
/// absolute positions, member sections, routed associations and labels.
pub fn scale_program() -> String {
    let mut s = String::new();
    s.push_str("// Restaurant ordering domain\nclassDiagram {\n");
    s.push_str("  styles {\n    type(\"text\") {\n      fontSize = 13\n    }\n  }\n\n");
    for (name, values) in ENUMS {
        let _ = writeln!(s, "  enum(\"{name}\") {{");
        for v in values {
            let _ = writeln!(s, "    \"{v}\"");
        }
        s.push_str("  }\n\n");
    }
    for (i, name) in CLASSES.iter().enumerate() {
        let (x, y) = scale_position(i);
        let lower = name.to_lowercase();
        let abstract_arg = if i % 11 == 3 { ", abstract = true" } else { "" };
        let _ = writeln!(s, "  class(\"{name}\"{abstract_arg}) {{");
        let _ = writeln!(s, "    layout {{\n      pos = apos({x}, {y})\n    }}");
        let _ = writeln!(s, "    private {{\n      \"id : int\"\n      \"{lower}Name : String\"\n    }}");
        let _ = writeln!(s, "    public {{\n      \"get{name}() : {name}\"\n      \"update(value : int) : bool\"\n    }}");
        s.push_str("  }\n\n");
    }
    for (k, (a, b, op)) in scale_associations().into_iter().enumerate() {
        let (a, b) = (CLASSES[a], CLASSES[b]);
        match k % 3 {
            0 => {
                let _ = writeln!(s, "  {a} {op} {b} with {{");
                s.push_str("    over = start(0.375).axisAligned(0.5, end(0.875))\n");
                s.push_str("    label(\"1..*\", 0.9, 8)\n  }\n");
            }
            1 => {
                let _ = writeln!(s, "  {a} {op} {b} with {{");
                s.push_str("    label(\"owns\", 0.5)\n  }\n");
            }
            _ => {
                let _ = writeln!(s, "  {a} {op} {b}");
            }
        }
    }
    s.push_str("}\n");
    s
}

/// Program whose output depends on a layout value: `B` jumps down when
/// `A` is dragged past x = 150, which rigid predictions cannot anticipate.
pub fn layout_dependent_program() -> String {
    "classDiagram {\n  class(\"A\") {\n    layout {\n      pos = apos(100, 0)\n    }\n  }\n  class(\"B\") {\n    layout {\n      pos = apos(0, 200)\n    }\n  }\n  if (A.pos.x > 150) {\n    B.layout { pos = apos(0, 300) }\n  }\n  A --> B\n}\n"
        .to_owned()
}
