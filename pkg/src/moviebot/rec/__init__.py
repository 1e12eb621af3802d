from .catalog import (
    Catalog,
    DuplicateIdError,
    Item,
    ParseError,
    count_matches,
    load_catalog,
    recommend,
)
from .usermodel import (
    LONG_TERM,
    SHORT_TERM,
    Preference,
    StorageError,
    UnknownSessionError,
    UnknownUserError,
    UserModel,
    UserModelStore,
    promote_preferences,
    summarize_user_model,
    update_user_model,
)
