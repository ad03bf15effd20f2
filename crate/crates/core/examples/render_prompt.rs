// Render a prompt and cut a raw completion down to the prediction.

use icl_gap::client::extract_prediction;
use icl_gap::corpus::{Example, Split};
use icl_gap::prompt::{render_prompt, PromptTemplate, TemplateRegistry};

pub fn run_example() -> icl_gap::Result<()> {
    let shots = vec![
        Example::new(0, "walk twice", "WALK WALK", Split::Train)?,
        Example::new(1, "jump left", "TURN_LEFT JUMP", Split::Train)?,
    ];
    let template = PromptTemplate::scan();
    let prompt = render_prompt(&template, &shots, "walk left twice")?;
    println!("{prompt}");
    println!("---");

    let raw = " TURN_LEFT WALK TURN_LEFT WALK\n\nCommand: run\nActions: RUN";
    println!("prediction: {:?}", extract_prediction(raw, &template));

    // user templates are TOML tables keyed by id
    let registry = TemplateRegistry::from_toml_str(
        r#"
        [templates.terse]
        prefix_text = "Translate."
        input_prefix = "In: "
        output_prefix = "Out: "
        "#,
    )?;
    println!("---\n{}", render_prompt(&registry.get("terse")?, &shots, "run")?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> icl_gap::Result<()> {
    run_example()
}
