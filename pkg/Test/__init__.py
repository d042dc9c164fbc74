# Test package for the idrkit interdisciplinarity toolkit
