from starlette import status

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_ORACLE = 3


class AppBaseException(Exception):
    def __init__(self, status_code: int, detail: str, exit_code: int = EXIT_RUNTIME):
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail
        self.exit_code = exit_code


class AppBadRequestException(AppBaseException):
    def __init__(self, msg: str):
        super().__init__(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=msg,
            exit_code=EXIT_USAGE,
        )


class GenomeParseException(AppBadRequestException):
    def __init__(self, position: int, msg: str):
        super().__init__(f"parse error at offset {position}: {msg}")
        self.position = position


class AppRuntimeException(AppBaseException):
    def __init__(self, msg: str):
        super().__init__(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=msg,
            exit_code=EXIT_RUNTIME,
        )


class NumericOverflowException(AppRuntimeException):
    def __init__(self, site: str):
        super().__init__(f"numeric overflow at activation site '{site}'")
        self.site = site


class OracleFailureException(AppBaseException):
    def __init__(self, msg: str):
        super().__init__(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=msg,
            exit_code=EXIT_ORACLE,
        )
