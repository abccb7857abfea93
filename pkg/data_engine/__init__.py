# Paquete de datos: formatos de archivo (etl_engine) y experimentos sintéticos (synth_engine).
