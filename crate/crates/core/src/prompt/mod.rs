//! Prompt templates and response post-processing.

mod response;
mod template;

pub use response::{extract_code_blocks, pvs_block, CodeBlock};
pub use template::{
    PromptError, PromptTemplate, RenderedPrompt, TemplateRegistry, ABSTRACT, FORMALIZE, REPAIR_ASSIST, SUMMARIZE,
};
