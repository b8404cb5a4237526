# Numérica, erros, E/S e a base dos comandos compartilhadas pelos apps
