# Middlewares package
