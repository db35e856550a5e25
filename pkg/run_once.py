#!/usr/bin/env python3
"""
Run Once
Executa a suíte de verificação rápida uma única vez (útil para testes)
Uso: python run_once.py [source] [dim]
"""

import sys
from pathlib import Path

# Adicionar o diretório raiz ao path
sys.path.append(str(Path(__file__).parent))

from main import EXIT_OK, main

if __name__ == "__main__":
    source = sys.argv[1] if len(sys.argv) > 1 else "lp:2"
    dim = sys.argv[2] if len(sys.argv) > 2 else "3"

    print(f"🧮 Executando suíte de verificação ({source}, d={dim})...", file=sys.stderr)
    print("=" * 50, file=sys.stderr)

    try:
        code = main(["verify", "--source", source, "--dim", dim, "--quick", "--save"])
        print("=" * 50, file=sys.stderr)
        if code == EXIT_OK:
            print("✅ Verificação concluída com sucesso!", file=sys.stderr)
        else:
            print(f"❌ Verificação terminou com código {code}", file=sys.stderr)
        sys.exit(code)

    except KeyboardInterrupt:
        print("\n❌ Execução interrompida pelo usuário", file=sys.stderr)
        sys.exit(1)
