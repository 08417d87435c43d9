use shortshift::Error;

pub const USAGE: u8 = 2;
pub const DATA: u8 = 3;
pub const NUMERIC: u8 = 4;

/// A failed stage: the exit code and the message to print.
#[derive(Debug)]
pub struct Failure {
    pub stage: &'static str,
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(stage: &'static str, message: impl Into<String>) -> Self {
        Failure {
            stage,
            code: USAGE,
            message: message.into(),
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Param(_) => USAGE,
        Error::Numeric(_) => NUMERIC,
        Error::Io { .. } | Error::Stream(_) | Error::Format(_) | Error::Truncated(_) | Error::Data(_) => DATA,
    }
}

/// Tags library errors with the stage they occurred in.
pub fn at(stage: &'static str) -> impl Fn(Error) -> Failure {
    move |e| Failure {
        stage,
        code: exit_code(&e),
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_by_error_kind() {
        assert_eq!(exit_code(&Error::Param("x".into())), USAGE);
        assert_eq!(exit_code(&Error::Numeric("x".into())), NUMERIC);
        assert_eq!(exit_code(&Error::Data("x".into())), DATA);
        assert_eq!(exit_code(&Error::Truncated("x".into())), DATA);
        let f = at("train")(Error::Numeric("nan".into()));
        assert_eq!((f.stage, f.code), ("train", NUMERIC));
    }
}
