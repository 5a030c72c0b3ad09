pub mod clone;
pub mod oracle;
pub mod qkd;
pub mod verify;
